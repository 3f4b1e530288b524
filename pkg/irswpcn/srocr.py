"""
Sequential rank-one constraint relaxation.

A relaxed lifted problem is solved repeatedly with the cut
u_max(W)^H W u_max(W) >= v tr(W), the level v being driven from 0 towards 1
by steps of delta. An infeasible cut halves delta and keeps the previous
iterate. The engine is generic over the relaxed problem: a subproblem is any
callable (v, anchor) -> (W, SdpStatus, objective).
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from irswpcn.linalg import (
    HermitianMatrix,
    principal_eigenpair,
    rank_one_ratio,
    real_trace_product,
)
from irswpcn.model import ReflectVector
from irswpcn.sdp import (
    SdpCut,
    SdpStatus,
    SolverError,
    log_objective,
    solve_linear_sdp,
    solve_log_sdp,
)

logger = logging.getLogger(__name__)

DELTA_FLOOR = 1e-6
ZERO_ENTRY_TOL = 1e-12

Subproblem = Callable[
    [float, Optional[HermitianMatrix]],
    Tuple[Optional[HermitianMatrix], SdpStatus, float],
]


class InitialInfeasible(SolverError):
    pass


class SrocrStatus(enum.Enum):
    CONVERGED = "converged"
    STALLED = "stalled"


@dataclass(frozen=True)
class SrocrConfig:
    # None picks min(0.1, 1 - ratio of the unconstrained optimum).
    delta0: Optional[float] = None
    eps1: float = 0.95
    eps2: float = 1e-3
    max_iters: int = 100
    max_halvings: int = 60

    def __post_init__(self):
        if self.delta0 is not None and not self.delta0 > 0:
            raise ValueError(f"delta0 must be positive, got {self.delta0}")
        # eps1 = 0 leaves the objective-stall test as the only stopping rule.
        if not 0 <= self.eps1 <= 1:
            raise ValueError(f"eps1 must lie in [0, 1], got {self.eps1}")
        if not self.eps2 > 0:
            raise ValueError(f"eps2 must be positive, got {self.eps2}")
        if self.max_iters < 1 or self.max_halvings < 0:
            raise ValueError("max_iters must be >= 1 and max_halvings >= 0")


@dataclass(frozen=True)
class SrocrReport:
    iterations: int
    v_trajectory: Tuple[float, ...]
    objective_trajectory: Tuple[float, ...]
    halvings: int
    final_ratio: float
    status: SrocrStatus = SrocrStatus.CONVERGED

    @property
    def stalled(self):
        return self.status is SrocrStatus.STALLED


def srocr_solve(
    subproblem: Subproblem,
    config: Optional[SrocrConfig] = None,
    anchor: Optional[HermitianMatrix] = None,
):
    """
    Run the v-schedule on `subproblem` and return (W, SrocrReport).

    `anchor` warm-starts the cut of the first constrained solve (normally the
    lifted vector of a previous call); by default the unconstrained optimum
    anchors it. A Stalled report carries the iterate with the best rank-one
    ratio seen. Raises InitialInfeasible when the unconstrained solve fails.
    """
    config = config or SrocrConfig()
    W, status, g = subproblem(0.0, None)
    if not status.ok:
        raise InitialInfeasible(f"relaxed problem unsolvable: {status.kind.value}")
    ratio = rank_one_ratio(W)
    v_trajectory = [0.0]
    objective_trajectory = [g]
    delta = config.delta0 if config.delta0 is not None else min(0.1, 1 - ratio)
    delta = max(DELTA_FLOOR, delta)
    v = min(1.0, ratio + delta)
    anchor = W if anchor is None else anchor
    best = (ratio, W)
    halvings = 0
    result = SrocrStatus.STALLED

    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        W_next, status, g_next = subproblem(v, anchor)
        g_prev = g
        exhausted = not status.ok and halvings >= config.max_halvings
        if status.ok:
            W, g = W_next, g_next
        elif not exhausted:
            delta /= 2
            halvings += 1
            logger.debug(f"cut level {v:.6f} infeasible; delta halved to {delta:.3g}")
        v_used = v
        ratio = rank_one_ratio(W)
        v_trajectory.append(v_used)
        objective_trajectory.append(g)
        if ratio > best[0]:
            best = (ratio, W)
        logger.debug(
            f"srocr iteration {iterations}: v={v_used:.6f} ratio={ratio:.6f} "
            f"objective={g:.6g}"
        )
        if (
            v_used >= config.eps1
            and ratio >= config.eps1
            and abs(g - g_prev) <= config.eps2
        ):
            result = SrocrStatus.CONVERGED
            break
        if exhausted:
            break
        v = min(1.0, ratio + delta)
        anchor = W

    if result is SrocrStatus.STALLED:
        ratio, W = best
        logger.debug(f"srocr stalled after {iterations} iterations, ratio {ratio:.4f}")
    report = SrocrReport(
        iterations=iterations,
        v_trajectory=tuple(v_trajectory),
        objective_trajectory=tuple(objective_trajectory),
        halvings=halvings,
        final_ratio=ratio,
        status=result,
    )
    return W, report


def _cut(v, anchor):
    if anchor is None or v <= 0:
        return None
    return SdpCut.from_matrix(anchor, v)


def log_subproblem(terms, method=None) -> Subproblem:
    """The lifted downlink problem: maximize sum_k tau_k log2(1 + lam_k tr(G_k W))."""
    terms = list(terms)

    def solve(v, anchor):
        W, status = solve_log_sdp(terms, _cut(v, anchor), method)
        return W, status, (log_objective(terms, W) if status.ok else math.nan)

    return solve


def linear_subproblem(C) -> Subproblem:
    """
    The lifted uplink problem: maximize tr(C W). Objectives are reported as
    tr(C W) / (N lambda_max(C)), which lies in [0, 1] for C >= 0.
    """
    N = C.shape[0]
    lam, _ = principal_eigenpair(C)
    scale = N * lam if lam > 0 else 1.0

    def solve(v, anchor):
        W, status = solve_linear_sdp(C, _cut(v, anchor))
        value = real_trace_product(C, W) / scale if status.ok else math.nan
        return W, status, value

    return solve


def extract_unit_modulus(W, phase_tag=0) -> ReflectVector:
    """
    Project sqrt(lambda_max) u_max onto the unit-modulus set, with the first
    nonzero entry rotated to zero phase. Zero entries map to 1 and mark the
    vector degenerate.
    """
    lam, u = principal_eigenpair(W)
    u = math.sqrt(max(lam, 0.0)) * u
    magnitude = np.abs(u)
    degenerate = bool(np.any(magnitude < ZERO_ENTRY_TOL))
    w = np.ones_like(u)
    nonzero = magnitude >= ZERO_ENTRY_TOL
    w[nonzero] = u[nonzero] / magnitude[nonzero]
    if degenerate:
        logger.warning(
            f"{int(np.sum(~nonzero))} zero entries in rank-one extraction "
            "set to unit phase"
        )
    if np.any(nonzero):
        w[nonzero] *= np.conj(w[np.argmax(nonzero)])
    # Renormalize so rounding never breaks the unit-modulus invariant.
    w = w / np.abs(w)
    return ReflectVector(w, phase_tag=phase_tag, degenerate=degenerate)
