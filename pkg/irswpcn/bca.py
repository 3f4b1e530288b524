"""
Block coordinate ascent over (w_0, {w_k}, durations).

Each round solves the lifted downlink problem for w_0, the per-cluster uplink
problems for w_k (both through SROCR and rank-one extraction) and then the
closed-form time allocation. A reflect-vector update is kept only if it does
not lower the total throughput, so the objective trajectory is monotone.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from irswpcn.model import (
    ReflectVector,
    Solution,
    TimeAllocation,
    reflect_gain,
    weighted_gram,
)
from irswpcn.sdp import LogTerm
from irswpcn.srocr import (
    InitialInfeasible,
    SrocrConfig,
    extract_unit_modulus,
    linear_subproblem,
    log_subproblem,
    srocr_solve,
)
from irswpcn.time_alloc import allocate, compute_gains

logger = logging.getLogger(__name__)

MONOTONE_TOL = 1e-8


@dataclass(frozen=True)
class BcaConfig:
    eps: float = 1e-3
    max_rounds: int = 30
    srocr: SrocrConfig = field(default_factory=SrocrConfig)
    init_seed: int = 0
    # Anchor each SROCR run on the block's current lifted vector.
    warm_start: bool = True

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be at least 1, got {self.max_rounds}")


@dataclass(frozen=True)
class BcaReport:
    rounds: int
    objective_trajectory: Tuple[float, ...]
    per_round_timings: Tuple[float, ...]
    # (round, block, outcome), block is "w0" or "w<k>".
    subproblem_statuses: Tuple[Tuple[int, str, str], ...]
    converged: bool


def build_subproblem1(params, chans, wk, times):
    """
    Log-objective terms (tau_k, lambda_k, G_k) of the w_0 problem for fixed
    uplink vectors and durations. Clusters with an empty slot are dropped.
    """
    terms = []
    for k in range(chans.K):
        tau = times.tau[k]
        if tau == 0:
            continue
        lam = params.eta * times.tau0 * params.P0 / (tau * params.sigma2)
        b = [reflect_gain(wk[k], h) for h in chans.cascaded_uplink(k)]
        terms.append(LogTerm(tau, lam, weighted_gram(chans.cascaded_downlink(k), b)))
    if not terms:
        raise ValueError("every uplink slot is empty; the w0 objective is constant")
    return terms


def build_subproblem2(params, chans, w0, k):
    """H_k = sum_m |w_0^H g_hat_km|^2 h_hat_km h_hat_km^H."""
    c = [reflect_gain(w0, g) for g in chans.cascaded_downlink(k)]
    return weighted_gram(chans.cascaded_uplink(k), c)


def random_start(N, K, seed):
    """Uniform phases for w_0 then w_1..w_K from one generator."""
    rng = np.random.default_rng(seed)
    w0 = ReflectVector.random(N, rng, phase_tag=0)
    wk = tuple(ReflectVector.random(N, rng, phase_tag=k + 1) for k in range(K))
    return w0, wk


def srocr_vector(subproblem, config, current, phase_tag, warm_start=True):
    """
    SROCR on `subproblem` followed by extraction. Returns (vector, outcome);
    vector is None when the block must keep its current value.
    """
    anchor = current.lifted() if warm_start and current is not None else None
    try:
        W, report = srocr_solve(subproblem, config, anchor)
    except InitialInfeasible as e:
        logger.warning(f"reflect block {phase_tag}: {e}")
        return None, "initial-infeasible"
    if report.stalled:
        logger.warning(
            f"reflect block {phase_tag} stalled after {report.iterations} "
            f"iterations (ratio {report.final_ratio:.4f}); keeping previous value"
        )
        return None, report.status.value
    return extract_unit_modulus(W, phase_tag), report.status.value


def optimize(
    params,
    chans,
    config: Optional[BcaConfig] = None,
    initial: Optional[Solution] = None,
    optimize_times=True,
):
    """
    Maximize total throughput by block coordinate ascent.

    Starts from `initial` when given, else from random phases drawn with
    `config.init_seed`; durations start at the equal split. With
    `optimize_times` false the durations stay at the equal split and only
    the reflect vectors are optimized.
    """
    config = config or BcaConfig()
    T, K, N = params.T, chans.K, chans.N
    if initial is None:
        w0, wk = random_start(N, K, config.init_seed)
    else:
        w0, wk = initial.w0, tuple(initial.wk)
    times = TimeAllocation.equal_split(T, K)
    if optimize_times:
        times = allocate(compute_gains(params, chans, w0, wk), T)

    def evaluate(w0, wk, times):
        return Solution.evaluate(params, chans, w0, wk, times).throughput

    R = evaluate(w0, wk, times)
    trajectory = [R]
    timings = []
    statuses = []
    converged = False
    logger.debug(f"bca start: R={R:.6g}")

    for rnd in range(1, config.max_rounds + 1):
        start = time.perf_counter()
        R_prev = R

        if any(t > 0 for t in times.tau):
            terms = build_subproblem1(params, chans, wk, times)
            candidate, outcome = srocr_vector(
                log_subproblem(terms), config.srocr, w0, 0, config.warm_start
            )
            if candidate is not None:
                R_new = evaluate(candidate, wk, times)
                if R_new >= R:
                    w0, R = candidate, R_new
                else:
                    outcome = "rejected"
                    logger.debug(f"w0 update rejected: {R_new:.6g} < {R:.6g}")
            statuses.append((rnd, "w0", outcome))

        for k in range(K):
            if times.tau[k] == 0:
                statuses.append((rnd, f"w{k + 1}", "skipped"))
                continue
            H = build_subproblem2(params, chans, w0, k)
            candidate, outcome = srocr_vector(
                linear_subproblem(H), config.srocr, wk[k], k + 1, config.warm_start
            )
            if candidate is not None:
                trial = wk[:k] + (candidate,) + wk[k + 1 :]
                R_new = evaluate(w0, trial, times)
                if R_new >= R:
                    wk, R = trial, R_new
                else:
                    outcome = "rejected"
                    logger.debug(f"w{k + 1} update rejected: {R_new:.6g} < {R:.6g}")
            statuses.append((rnd, f"w{k + 1}", outcome))

        if optimize_times:
            # Optimal for the current vectors, so never a decrease beyond rounding.
            times = allocate(compute_gains(params, chans, w0, wk), T)
            R_new = evaluate(w0, wk, times)
            if R_new < R - MONOTONE_TOL:
                logger.warning(f"time allocation lowered R: {R_new:.9g} < {R:.9g}")
            R = R_new

        timings.append(time.perf_counter() - start)
        trajectory.append(R)
        logger.info(f"bca round {rnd}: R={R:.6g} ({timings[-1]:.2f}s)")
        if R <= 0 or (R - R_prev) / R < config.eps:
            converged = True
            break

    solution = Solution.evaluate(params, chans, w0, wk, times)
    report = BcaReport(
        rounds=len(timings),
        objective_trajectory=tuple(trajectory),
        per_round_timings=tuple(timings),
        subproblem_statuses=tuple(statuses),
        converged=converged,
    )
    return solution, report
