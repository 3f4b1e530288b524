"""
Optimal durations for fixed reflect vectors.

With every reflect vector fixed, cluster k sees the effective gain
gamma_k = (eta P0 / sigma^2) sum_m |w_k^H h_hat_km|^2 |w_0^H g_hat_km|^2 and
the throughput is sum_k tau_k log2(1 + gamma_k tau_0 / tau_k): a concave
problem whose optimum shares a single ratio x* = gamma_k tau_0 / tau_k over
all clusters, the root of (1 + x) ln(1 + x) - x = sum_k gamma_k.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.optimize

from irswpcn.model import TimeAllocation, cascade, reflect_gain

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class ClusterGains:
    gamma: Tuple[float, ...]

    def __post_init__(self):
        gamma = tuple(float(g) for g in self.gamma)
        if not gamma:
            raise ValueError("at least one cluster gain is required")
        if not all(math.isfinite(g) and g >= 0 for g in gamma):
            raise ValueError(f"cluster gains must be finite and nonnegative: {gamma}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def K(self):
        return len(self.gamma)

    @property
    def total(self):
        return math.fsum(self.gamma)

    @property
    def degenerate(self):
        """No cluster receives energy; every allocation has zero throughput."""
        return self.total == 0


def compute_gains(params, chans, w0, wk, grouping=None) -> ClusterGains:
    if grouping is not None:
        chans = chans.regroup(grouping)
    scale = params.eta * params.P0 / params.sigma2
    gamma = []
    for k in range(chans.K):
        total = 0.0
        for m in range(len(chans.assignment[k])):
            b = reflect_gain(wk[k], cascade(chans.h_BS, chans.h_user(k, m)))
            c = reflect_gain(w0, cascade(chans.g_user(k, m), chans.g_BS))
            total += b * c
        gamma.append(scale * total)
    return ClusterGains(tuple(gamma))


def _excess(x, gamma_total):
    return (1 + x) * math.log1p(x) - x - gamma_total


def solve_root(gamma_total):
    """The unique x >= 0 with (1 + x) ln(1 + x) - x = gamma_total."""
    if gamma_total < 0 or not math.isfinite(gamma_total):
        raise ValueError(f"total gain must be finite and nonnegative: {gamma_total}")
    if gamma_total == 0:
        logger.debug("zero total gain; root is 0")
        return 0.0
    hi = 1.0
    while _excess(hi, gamma_total) < 0:
        hi *= 2
    return scipy.optimize.bisect(
        _excess,
        0.0,
        hi,
        args=(gamma_total,),
        xtol=ROOT_TOL,
        rtol=4 * np.finfo(float).eps,
        maxiter=400,
    )


def stationarity_residual(x, gamma_total):
    """log2(1 + x) - (x + gamma_total) log2(e) / (1 + x), zero at the optimum."""
    return math.log2(1 + x) - (x + gamma_total) * math.log2(math.e) / (1 + x)


def allocate(gains: ClusterGains, T) -> TimeAllocation:
    if not T > 0:
        raise ValueError(f"block duration must be positive, got {T}")
    if gains.degenerate:
        return TimeAllocation(T, (0.0,) * gains.K)
    x = solve_root(gains.total)
    ratios = [g / x for g in gains.gamma]
    tau0 = T / (1 + math.fsum(ratios))
    tau = tuple(r * tau0 for r in ratios)
    logger.debug(f"time allocation x*={x:.9g} tau0={tau0:.6g} tau={tau}")
    return TimeAllocation(tau0, tau)


def allocation_throughput(gains: ClusterGains, times: TimeAllocation):
    """sum_k tau_k log2(1 + gamma_k tau_0 / tau_k); empty slots carry nothing."""
    if len(times.tau) != gains.K:
        raise ValueError(f"{len(times.tau)} durations for {gains.K} clusters")
    return sum(
        t * math.log2(1 + g * times.tau0 / t)
        for g, t in zip(gains.gamma, times.tau)
        if t > 0
    )
