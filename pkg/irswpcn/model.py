"""
System model of the IRS-assisted wireless powered network: parameters,
channel synthesis, reflect vectors, time allocations and the harvested
energy / throughput formulas every optimizer evaluates.

Cluster and user indices are 0-based. Channels are generated for M users in a
flat order; a ChannelRealization carries the assignment of flat users to
clusters, so `g_user(k, m)` is the downlink channel of the m-th user of
cluster k.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from irswpcn.linalg import (
    DimensionError,
    DomainError,
    HermitianMatrix,
    check_finite,
    hermitian,
)

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOL = 1e-9
BUDGET_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    P0: float = 10.0
    eta: float = 0.8
    sigma2: float = 1e-14
    T: float = 0.1
    N: int = 8
    clusters: Tuple[int, ...] = (4, 4, 4)
    zeta0: float = 1e-3
    d0: float = 1.0
    d_BI: float = 1.0
    alpha_BI: float = 2.2
    # Per-user values in flat user order; a scalar applies to every user.
    alpha_user: Tuple[float, ...] = 2.5
    d_user: Tuple[float, ...] = 5.0
    kappa: float = 1.0

    def __post_init__(self):
        clusters = tuple(int(m) for m in np.atleast_1d(self.clusters))
        object.__setattr__(self, "clusters", clusters)
        if len(clusters) < 1 or any(m < 1 for m in clusters):
            raise ValueError(f"every cluster needs at least one user: {clusters}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "alpha_user", self._per_user(self.alpha_user))
        object.__setattr__(self, "d_user", self._per_user(self.d_user))

        if not (self.P0 > 0 and self.sigma2 > 0 and self.T > 0):
            raise ValueError("P0, sigma2 and T must be positive")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if self.N < 1:
            raise ValueError(f"N must be at least 1, got {self.N}")
        if self.zeta0 <= 0 or self.kappa < 0:
            raise ValueError("zeta0 must be positive and kappa nonnegative")
        if min((self.d0, self.d_BI) + self.d_user) <= 0:
            raise ValueError("all distances must be positive")

    def _per_user(self, values):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        M = sum(self.clusters)
        if values.size == 1:
            values = np.full(M, values[0])
        if values.size != M:
            raise DimensionError(f"expected {M} per-user values, got {values.size}")
        return tuple(float(x) for x in values)

    @property
    def M(self):
        return sum(self.clusters)

    @property
    def K(self):
        return len(self.clusters)

    def default_assignment(self):
        """Contiguous blocks of the flat user order, sized by `clusters`."""
        bounds = np.cumsum((0,) + self.clusters)
        return tuple(
            tuple(range(bounds[k], bounds[k + 1])) for k in range(self.K)
        )

    def path_loss(self, distance, exponent):
        return self.zeta0 * (self.d0 / distance) ** exponent

    def replace(self, **changes):
        """
        `dataclasses.replace` that re-broadcasts per-user values when the
        cluster layout changes.
        """
        if "clusters" in changes:
            for key in ("alpha_user", "d_user"):
                if key not in changes and len(set(getattr(self, key))) == 1:
                    changes[key] = getattr(self, key)[0]
        return dataclasses.replace(self, **changes)

    @classmethod
    def evaluation_defaults(cls, **overrides):
        params = dict(
            P0=10.0,  # 40 dBm
            eta=0.8,
            sigma2=1e-14,  # -110 dBm
            T=0.1,
            N=8,
            clusters=(4, 4, 4),
            zeta0=1e-3,  # -30 dB
            d0=1.0,
            d_BI=1.0,
            alpha_BI=2.2,
            alpha_user=2.5,
            d_user=5.0,
            kappa=1.0,
        )
        params.update(overrides)
        return cls(**params)


def draw_distances(params, low, high, seed):
    """Redraw every user-IRS distance uniformly in [low, high] meters."""
    rng = np.random.default_rng(seed)
    return params.replace(d_user=tuple(rng.uniform(low, high, size=params.M)))


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    g_BS: np.ndarray
    h_BS: np.ndarray
    g: np.ndarray  # (M, N), IRS -> user
    h: np.ndarray  # (M, N), user -> IRS
    seed: int
    assignment: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        for name in ("g_BS", "h_BS", "g", "h"):
            object.__setattr__(self, name, check_finite(_frozen(getattr(self, name))))
        N = self.g_BS.shape[0]
        if self.h_BS.shape != (N,) or self.g.shape[1:] != (N,):
            raise DimensionError("channel vectors must all have length N")
        if self.h.shape != self.g.shape:
            raise DimensionError("downlink and uplink user channels differ in shape")
        assignment = tuple(tuple(int(i) for i in c) for c in self.assignment)
        if not assignment:
            assignment = (tuple(range(self.M)),)
        flat = sorted(i for c in assignment for i in c)
        if flat != list(range(self.M)):
            raise ValueError(
                f"assignment must place each of the {self.M} users exactly once"
            )
        object.__setattr__(self, "assignment", assignment)

    @property
    def N(self):
        return self.g_BS.shape[0]

    @property
    def M(self):
        return self.g.shape[0]

    @property
    def K(self):
        return len(self.assignment)

    def cluster_sizes(self):
        return tuple(len(c) for c in self.assignment)

    def regroup(self, assignment):
        return dataclasses.replace(self, assignment=assignment)

    def g_user(self, k, m):
        return self.g[self.assignment[k][m]]

    def h_user(self, k, m):
        return self.h[self.assignment[k][m]]

    def cascaded_downlink(self, k):
        """Rows g_{k,m} (.) g_BS for the users of cluster k."""
        return self.g[list(self.assignment[k])] * self.g_BS

    def cascaded_uplink(self, k):
        """Rows h_BS (.) h_{k,m} for the users of cluster k."""
        return self.h_BS * self.h[list(self.assignment[k])]


def _rician(rng, shape, kappa):
    # LOS component is the all-ones vector.
    nlos = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return np.sqrt(kappa / (1 + kappa)) + np.sqrt(1 / (1 + kappa)) * nlos


def generate_channels(params, seed) -> ChannelRealization:
    """
    Draw one realization of all channels with a PCG64 generator seeded by
    `seed`. Draw order is fixed (g_BS, h_BS, g, h) so a (params, seed) pair
    always reproduces the same values.
    """
    rng = np.random.default_rng(seed)
    N, M = params.N, params.M
    bs_amp = math.sqrt(params.path_loss(params.d_BI, params.alpha_BI))
    user_amp = np.sqrt(
        params.path_loss(np.array(params.d_user), np.array(params.alpha_user))
    )[:, None]
    g_BS = bs_amp * _rician(rng, (N,), params.kappa)
    h_BS = bs_amp * _rician(rng, (N,), params.kappa)
    g = user_amp * _rician(rng, (M, N), params.kappa)
    h = user_amp * _rician(rng, (M, N), params.kappa)
    return ChannelRealization(
        g_BS, h_BS, g, h, seed=int(seed), assignment=params.default_assignment()
    )


@dataclass(frozen=True, eq=False)
class ReflectVector:
    w: np.ndarray
    phase_tag: int = 0
    # Set when a rank-one extraction met a zero-magnitude entry.
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        w = check_finite(_frozen(np.ravel(self.w)), "reflect vector")
        deviation = np.max(np.abs(np.abs(w) - 1)) if w.size else 0.0
        if deviation > UNIT_MODULUS_TOL:
            raise ValueError(f"reflect vector is not unit-modulus (off by {deviation})")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_phases(cls, theta, phase_tag=0):
        return cls(np.exp(1j * np.asarray(theta, dtype=float)), phase_tag)

    @classmethod
    def random(cls, N, rng, phase_tag=0):
        return cls.from_phases(rng.uniform(0, 2 * np.pi, size=N), phase_tag)

    @property
    def N(self):
        return self.w.shape[0]

    def lifted(self) -> HermitianMatrix:
        return hermitian(np.outer(self.w, self.w.conj()))


def _vec(v):
    return v.w if isinstance(v, ReflectVector) else np.asarray(v, dtype=np.complex128)


@dataclass(frozen=True)
class TimeAllocation:
    tau0: float
    tau: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "tau0", float(self.tau0))
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        if self.tau0 < 0 or any(t < 0 for t in self.tau):
            raise ValueError(f"durations must be nonnegative: {self}")

    @property
    def total(self):
        return self.tau0 + sum(self.tau)

    def check_budget(self, T):
        if self.total > T * (1 + BUDGET_TOL):
            raise ValueError(f"durations sum to {self.total} > T = {T}")
        return self

    @classmethod
    def equal_split(cls, T, K):
        return cls(T / (K + 1), (T / (K + 1),) * K)


@dataclass(frozen=True, eq=False)
class Solution:
    w0: ReflectVector
    wk: Tuple[ReflectVector, ...]
    times: TimeAllocation
    throughput: float

    @classmethod
    def evaluate(cls, params, chans, w0, wk, times):
        """Build a Solution whose throughput is recomputed from the fields."""
        times.check_budget(params.T)
        wk = tuple(wk)
        if len(wk) != chans.K or len(times.tau) != chans.K:
            raise DimensionError(
                f"need {chans.K} uplink vectors and durations, "
                f"got {len(wk)} and {len(times.tau)}"
            )
        value = sum(
            cluster_throughput(params, chans, w0, wk[k], times.tau0, times.tau[k], k)
            for k in range(chans.K)
        )
        return cls(w0, wk, times, value)


def cascade(a, b):
    a, b = _vec(a), _vec(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot cascade shapes {a.shape} and {b.shape}")
    return a * b


def reflect_gain(w, v):
    """|w^H v|^2."""
    w, v = _vec(w), _vec(v)
    if w.shape != v.shape:
        raise DimensionError(f"reflect vector {w.shape} vs channel {v.shape}")
    return float(np.abs(np.vdot(w, v)) ** 2)


def harvested_energy(params, chans, w0, k, m, tau0):
    gain = reflect_gain(w0, cascade(chans.g_user(k, m), chans.g_BS))
    return params.eta * tau0 * params.P0 * gain


def cluster_throughput(params, chans, w0, wk, tau0, tauk, k):
    """
    tau_k log2(1 + sum_m P_{k,m} |h_BS^H Phi_k h_{k,m}|^2 / sigma^2) with
    P_{k,m} = E_{k,m} / tau_k. A zero-length slot carries nothing.
    """
    if tauk < 0:
        raise ValueError(f"negative duration {tauk}")
    if tauk == 0:
        return 0.0
    received = 0.0
    for m in range(len(chans.assignment[k])):
        power = harvested_energy(params, chans, w0, k, m, tau0) / tauk
        received += power * reflect_gain(wk, cascade(chans.h_BS, chans.h_user(k, m)))
    return tauk * math.log2(1 + received / params.sigma2)


def total_throughput(params, chans, solution):
    times = solution.times
    return sum(
        cluster_throughput(
            params, chans, solution.w0, solution.wk[k], times.tau0, times.tau[k], k
        )
        for k in range(chans.K)
    )


def weighted_gram(vectors: Sequence, weights: Sequence) -> HermitianMatrix:
    """sum_i weights_i v_i v_i^H."""
    V = np.atleast_2d(np.asarray([_vec(v) for v in vectors], dtype=np.complex128))
    weights = np.asarray(weights, dtype=float).ravel()
    if V.shape[0] != weights.size or weights.size == 0:
        raise DimensionError(
            f"{V.shape[0]} vectors cannot be paired with {weights.size} weights"
        )
    if np.any(weights < 0):
        raise ValueError("gram weights must be nonnegative")
    return hermitian((V.T * weights) @ V.conj())


def selector(n, N) -> HermitianMatrix:
    """B_n: the single 1 at (n, n); tr(B_n W) = W_nn."""
    if not 0 <= n < N:
        raise DomainError(f"selector index {n} outside 0..{N - 1}")
    B = np.zeros((N, N), dtype=np.complex128)
    B[n, n] = 1
    return B
