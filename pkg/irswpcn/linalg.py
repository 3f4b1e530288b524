import logging

import numpy as np
import numpy.typing as npt
import scipy.linalg

logger = logging.getLogger(__name__)

# Complex N x N Hermitian operand. Built through `hermitian`, which symmetrizes.
HermitianMatrix = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-12


class DimensionError(ValueError):
    pass


class DomainError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


def check_finite(a, what="input"):
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{what} contains non-finite entries")
    return a


def hermitian(entries) -> HermitianMatrix:
    """
    Build a HermitianMatrix from `entries`. The result is symmetrized, so
    ||W - W^H||_max is zero up to rounding.
    """
    a = np.array(entries, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    check_finite(a, "matrix")
    return 0.5 * (a + a.conj().T)


def real_trace_product(a, b):
    """tr(a b) for Hermitian a, b, returned as a real number."""
    return float(np.real(np.sum(a * b.T)))


def principal_eigenpair(W):
    """
    Return (lambda_max, u_max) of a Hermitian matrix: the algebraically
    largest eigenvalue and a unit-norm eigenvector for it.
    """
    W = np.asarray(W, dtype=np.complex128)
    check_finite(W, "matrix")
    n = W.shape[0]
    lam, vec = scipy.linalg.eigh(W, subset_by_index=[n - 1, n - 1])
    u = vec[:, 0]
    return float(lam[0]), u / np.linalg.norm(u)


def rank_one_ratio(W):
    """lambda_max(W) / tr(W), clipped into [0, 1]."""
    trace = float(np.real(np.trace(W)))
    if not trace > 0:
        raise DomainError(f"rank-one ratio needs a positive trace, got {trace}")
    lam, _ = principal_eigenpair(W)
    return min(1.0, max(0.0, lam / trace))


def embed(C):
    """
    Real 2N x 2N symmetric embedding [[Re C, -Im C], [Im C, Re C]] of a
    Hermitian C. For Hermitian W, <embed(C), embed(W)> = 2 tr(C W).
    """
    re, im = np.real(C), np.imag(C)
    return np.block([[re, -im], [im, re]])


def unembed(X):
    """Inverse of `embed`, averaging the two copies of each block."""
    n = X.shape[0] // 2
    re = 0.5 * (X[:n, :n] + X[n:, n:])
    im = 0.5 * (X[n:, :n] - X[:n, n:])
    return hermitian(re + 1j * im)
