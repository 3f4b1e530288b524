"""
Conic solves over the unit-diagonal PSD set {W >= 0 : W_nn = 1} with an
optional rank-one cut  u^H W u >= v tr(W).

Both the linear objective tr(C W) and the concave objective
sum_k tau_k log2(1 + lambda_k tr(G_k W)) are "trace functions": sums of
scalar concave functions of <F_i, X>. One barrier interior-point core
maximizes any such sum on the real 2N x 2N embedding of the problem,

    t * f(X) + log det X (+ log <A, X>)    s.t.  diag(X) = 1,

with Newton centering steps whose Hessian is -X^{-1} (.) X^{-1} plus one
rank-one term per curved trace function. The Newton system therefore reduces
to a dense (2N + L) x (2N + L) solve, where L counts the curved terms.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

import irswpcn
from irswpcn.linalg import (
    DimensionError,
    HermitianMatrix,
    embed,
    hermitian,
    principal_eigenpair,
    real_trace_product,
    unembed,
)

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-7
LN2 = math.log(2)


class SolverError(RuntimeError):
    pass


class SdpStatusKind(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class SdpStatus:
    kind: SdpStatusKind
    iterations: int = 0
    residuals: float = 0.0

    @property
    def ok(self):
        return self.kind is SdpStatusKind.OPTIMAL


@dataclass(frozen=True, eq=False)
class SdpCut:
    """The constraint tr((u u^H - v I) W) >= 0."""

    anchor: np.ndarray
    level: float

    def __post_init__(self):
        u = np.array(self.anchor, dtype=np.complex128).ravel()
        if abs(np.linalg.norm(u) - 1) > 1e-9:
            raise ValueError("cut anchor must have unit norm")
        if not 0 <= self.level <= 1:
            raise ValueError(f"cut level must lie in [0, 1], got {self.level}")
        u.setflags(write=False)
        object.__setattr__(self, "anchor", u)
        object.__setattr__(self, "level", float(self.level))

    @classmethod
    def from_matrix(cls, W, level):
        """Anchor the cut on the principal eigenvector of W."""
        _, u = principal_eigenpair(W)
        return cls(u, min(1.0, max(0.0, level)))

    def matrix(self) -> HermitianMatrix:
        u = self.anchor
        return hermitian(np.outer(u, u.conj()) - self.level * np.eye(u.size))

    def value(self, W):
        return real_trace_product(self.matrix(), W)


@dataclass(frozen=True, eq=False)
class LogTerm:
    """One summand tau * log2(1 + lam * tr(G W)) of the log objective."""

    tau: float
    lam: float
    G: np.ndarray

    def __post_init__(self):
        if self.tau < 0 or self.lam < 0:
            raise ValueError("log terms need tau >= 0 and lambda >= 0")
        object.__setattr__(self, "G", hermitian(self.G))


def log_objective(terms, W):
    return sum(
        t.tau * math.log2(1 + t.lam * max(0.0, real_trace_product(t.G, W)))
        for t in terms
    )


class _TraceTerm:
    """a * <F, X> (linear) or a * log2(1 + b <F, X>) (log) on the embedding."""

    def __init__(self, F, a, b=None):
        self.F = F
        self.a = a
        self.b = b

    @property
    def curved(self):
        return self.b is not None

    def trace(self, X):
        return float(np.sum(self.F * X))

    def value(self, s):
        if self.b is None:
            return self.a * s
        return self.a * math.log1p(self.b * s) / LN2

    def d1(self, s):
        if self.b is None:
            return self.a
        return self.a * self.b / (LN2 * (1 + self.b * s))

    def d2(self, s):
        if self.b is None:
            return 0.0
        return -self.a * self.b**2 / (LN2 * (1 + self.b * s) ** 2)


def _embedded(M):
    # <_embedded(C), embed(W)> = tr(C W)
    return 0.5 * embed(M)


class _BarrierFailure(Exception):
    pass


def _cholesky(X):
    try:
        return scipy.linalg.cho_factor(X, lower=True)
    except (np.linalg.LinAlgError, ValueError):
        return None


def _barrier_maximize(terms, X0, cut=None, gap_tol=None, target=None, mu=8.0):
    """
    Maximize sum(terms) over {X > 0, diag(X) = 1, <cut, X> > 0} from the
    strictly feasible X0. Returns (X, newton_steps, reached_target).

    With `target`, returns as soon as the (single, linear) objective reaches it.
    """
    settings = irswpcn.settings
    gap_tol = settings["sdp_gap_tol"] if gap_tol is None else gap_tol
    max_newton = settings["sdp_max_newton"]
    n = X0.shape[0]
    m = n + (cut is not None)
    X = X0.copy()

    def objective(X):
        return sum(term.value(term.trace(X)) for term in terms)

    def barrier(X, factor):
        if factor is None:
            return -np.inf
        logdet = 2 * np.sum(np.log(np.diag(factor[0])))
        if cut is not None:
            s = float(np.sum(cut * X))
            if s <= 0:
                return -np.inf
            logdet += math.log(s)
        return logdet

    if not terms:
        return X, 0, False

    t = 1.0
    steps = 0
    factor = _cholesky(X)
    if factor is None:
        raise _BarrierFailure("starting point is not positive definite")
    while True:
        while True:
            if target is not None and objective(X) >= target:
                return X, steps, True
            if steps >= max_newton:
                raise _BarrierFailure(f"no convergence within {max_newton} steps")
            steps += 1

            traces = [term.trace(X) for term in terms]
            grad = t * sum(term.d1(s) * term.F for term, s in zip(terms, traces))
            curvature = [
                (term.F, -t * term.d2(s))
                for term, s in zip(terms, traces)
                if term.curved
            ]
            if cut is not None:
                s_cut = float(np.sum(cut * X))
                grad = grad + cut / s_cut
                curvature.append((cut, 1.0 / s_cut**2))

            # X grad_psi X, with the log det gradient X^{-1} contributing X.
            P = X @ grad @ X + X
            Q = [X @ F @ X for F, _ in curvature]
            L = len(curvature)
            system = np.zeros((n + L, n + L))
            system[:n, :n] = X * X
            rhs = np.empty(n + L)
            rhs[:n] = np.diag(P)
            for i, (F, omega) in enumerate(curvature):
                system[:n, n + i] = np.diag(Q[i]) * omega
                system[n + i, :n] = np.diag(Q[i])
                for j, (Fj, _) in enumerate(curvature):
                    system[n + j, n + i] = float(np.sum(Fj * Q[i])) * omega
                system[n + i, n + i] += 1.0
                rhs[n + i] = float(np.sum(F * P))
            try:
                z = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError as e:
                raise _BarrierFailure(f"singular Newton system: {e}")
            y, c = z[:n], z[n:]
            D = P - X * y[None, :] @ X
            for i, (_, omega) in enumerate(curvature):
                D -= omega * c[i] * Q[i]
            D = 0.5 * (D + D.T)

            full_grad = grad + scipy.linalg.cho_solve(factor, np.eye(n))
            decrement = float(np.sum(full_grad * D))
            if not np.isfinite(decrement):
                raise _BarrierFailure("non-finite Newton decrement")
            if decrement <= 1e-10:
                break

            psi = t * objective(X) + barrier(X, factor)
            alpha = 1.0
            while alpha > 1e-14:
                X_new = X + alpha * D
                factor_new = _cholesky(X_new)
                psi_new = barrier(X_new, factor_new)
                if np.isfinite(psi_new):
                    psi_new += t * objective(X_new)
                    if psi_new >= psi + 0.25 * alpha * decrement:
                        break
                alpha *= 0.5
            else:
                if decrement > 1e-6:
                    raise _BarrierFailure(
                        f"line search stalled with decrement {decrement:.3g}"
                    )
                break
            X, factor = X_new, factor_new
            logger.debug(
                f"barrier t={t:.3g} step={alpha:.3g} decrement={decrement:.3g}"
            )

        if m / t <= gap_tol * max(1.0, abs(objective(X))):
            return X, steps, False
        t *= mu


def _finish(X):
    """Rescale X -> S X S with S = diag(X)^{-1/2}; keeps X PSD, fixes diag."""
    d = 1 / np.sqrt(np.diag(X))
    return X * np.outer(d, d)


def _status_for(W, cut, steps):
    residual = float(np.max(np.abs(np.real(np.diag(W)) - 1)))
    residual = max(residual, -float(np.linalg.eigvalsh(W)[0]))
    if cut is not None:
        residual = max(residual, -cut.value(W))
    kind = SdpStatusKind.OPTIMAL
    if residual > FEASIBILITY_TOL:
        logger.debug(f"primal residual {residual:.3g} after {steps} steps")
        kind = SdpStatusKind.NUMERICAL_FAILURE
    return SdpStatus(kind, steps, residual)


def _strict_start(N, cut):
    """
    A strictly feasible embedded starting point, or None when the cut admits
    no unit-diagonal PSD point with a strictly positive margin.
    """
    n = 2 * N
    if cut is None:
        return np.eye(n), 0
    A = _embedded(cut.matrix())
    scale = np.linalg.norm(A)
    if scale == 0:
        return None, 0
    if float(np.trace(A)) > 1e-3 * N:
        return np.eye(n), 0
    margin = 1e-3 * N
    X, steps, reached = _barrier_maximize(
        [_TraceTerm(A / scale, 1.0)], np.eye(n), target=margin / scale
    )
    value = float(np.sum(A * X))
    if reached or value > 1e-7 * N:
        return X, steps
    logger.debug(f"cut level {cut.level:.6f} infeasible: best margin {value:.3g}")
    return None, steps


def _solve(terms, N, cut, value_of):
    try:
        X0, phase1 = _strict_start(N, cut)
        if X0 is None:
            return None, SdpStatus(SdpStatusKind.INFEASIBLE, phase1, 0.0)
        A = None if cut is None else _embedded(cut.matrix())
        X, steps, _ = _barrier_maximize(terms, X0, cut=A)
    except _BarrierFailure as e:
        logger.debug(f"barrier failure: {e}")
        return None, SdpStatus(SdpStatusKind.NUMERICAL_FAILURE, 0, np.inf)
    W = unembed(_finish(X))
    status = _status_for(W, cut, phase1 + steps)
    if not status.ok:
        return None, status
    logger.debug(f"sdp optimal value {value_of(W):.6g} in {status.iterations} steps")
    return W, status


def _check_cut(cut, N):
    if cut is not None and cut.anchor.size != N:
        raise DimensionError(f"cut anchor has length {cut.anchor.size}, expected {N}")


def solve_linear_sdp(C, cut: Optional[SdpCut] = None):
    """
    max tr(C W)  s.t.  W_nn = 1, W >= 0 [, tr((u u^H - v I) W) >= 0].

    Returns (W, SdpStatus); W is None unless the status is optimal.
    """
    C = hermitian(C)
    N = C.shape[0]
    _check_cut(cut, N)
    F = _embedded(C)
    scale = np.linalg.norm(F)
    terms = [] if scale == 0 else [_TraceTerm(F / scale, 1.0)]
    return _solve(terms, N, cut, lambda W: real_trace_product(C, W))


def solve_log_sdp(terms: Sequence[LogTerm], cut: Optional[SdpCut] = None, method=None):
    """
    max sum_k tau_k log2(1 + lambda_k tr(G_k W)) over the same feasible set as
    `solve_linear_sdp`. Terms with a zero weight or a zero matrix are
    constant and dropped.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("log objective needs at least one term")
    N = terms[0].G.shape[0]
    if any(t.G.shape != (N, N) for t in terms):
        raise DimensionError("log terms have mismatched dimensions")
    _check_cut(cut, N)
    method = method or irswpcn.settings["log_sdp_method"]
    if method == "frank-wolfe":
        return _frank_wolfe(terms, cut)
    if method != "barrier":
        raise ValueError(f"unknown log-SDP method {method!r}")

    weight = sum(t.tau for t in terms) or 1.0
    trace_terms = []
    for t in terms:
        F = _embedded(t.G)
        scale = np.linalg.norm(F)
        if t.tau == 0 or t.lam == 0 or scale == 0:
            continue
        trace_terms.append(_TraceTerm(F / scale, t.tau / weight, t.lam * scale))
    # The gap test is absolute below 1, so lift tiny objectives to unit scale.
    reference = sum(term.value(1.0) for term in trace_terms)
    if 0 < reference < 1:
        for term in trace_terms:
            term.a /= reference
    return _solve(trace_terms, N, cut, lambda W: log_objective(terms, W))


def _log_gradient(terms, W):
    return sum(
        t.tau * t.lam / (LN2 * (1 + t.lam * real_trace_product(t.G, W))) * t.G
        for t in terms
    )


def _frank_wolfe(terms, cut, max_iters=500, rel_gap=1e-6):
    N = terms[0].G.shape[0]
    W, status = solve_linear_sdp(_log_gradient(terms, np.eye(N)), cut)
    if not status.ok:
        return None, status
    steps = status.iterations
    f = log_objective(terms, W)
    for it in range(max_iters):
        S, status = solve_linear_sdp(_log_gradient(terms, W), cut)
        if not status.ok:
            return None, status
        steps += status.iterations
        direction = S - W
        gap = real_trace_product(_log_gradient(terms, W), direction)
        if gap <= rel_gap * max(1.0, abs(f)):
            break
        gamma = 2 / (it + 2)
        search = scipy.optimize.minimize_scalar(
            lambda g: -log_objective(terms, W + g * direction),
            bounds=(0.0, 1.0),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -search.fun > log_objective(terms, W + gamma * direction):
            gamma = search.x
        W = hermitian(W + gamma * direction)
        f = log_objective(terms, W)
    else:
        if gap > 1e-4 * max(1.0, abs(f)):
            logger.warning(f"frank-wolfe stopped with gap {gap:.3g}")
            return None, SdpStatus(SdpStatusKind.NUMERICAL_FAILURE, steps, gap)
    status = _status_for(W, cut, steps)
    return (W if status.ok else None), status
