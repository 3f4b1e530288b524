"""
Comparison algorithms sharing the system model with `bca.optimize`.

Every baseline returns a Solution except the upper bound, which optimizes
the lifted matrices without any rank-one requirement and therefore returns a
throughput value only.
"""
import enum
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from irswpcn.bca import (
    BcaConfig,
    optimize,
    random_start,
    srocr_vector,
)
from irswpcn.model import (
    ReflectVector,
    Solution,
    TimeAllocation,
    reflect_gain,
    weighted_gram,
)
from irswpcn.sdp import LogTerm, SolverError, solve_linear_sdp, solve_log_sdp
from irswpcn.srocr import log_subproblem
from irswpcn.time_alloc import (
    ClusterGains,
    allocate,
    allocation_throughput,
    compute_gains,
)

logger = logging.getLogger(__name__)


class BaselineTag(enum.Enum):
    OPTIMIZED_NO_TA = "optimized-no-ta"
    RANDOM_WITH_TA = "random-with-ta"
    RANDOM_NO_TA = "random-no-ta"
    SAME_IRS_WITH_TA = "same-irs-with-ta"
    UPPER_BOUND = "upper-bound"
    DISCRETE_PHASE = "discrete-phase"


@dataclass(frozen=True)
class BaselineKind:
    tag: BaselineTag
    bits: Optional[int] = None

    def __post_init__(self):
        if self.tag is BaselineTag.DISCRETE_PHASE:
            if self.bits is None or self.bits < 1:
                raise ValueError(f"discrete phases need bits >= 1, got {self.bits}")
        elif self.bits is not None:
            raise ValueError(f"{self.tag.value} takes no bit count")

    @property
    def name(self):
        if self.tag is BaselineTag.DISCRETE_PHASE:
            return f"{self.tag.value}-{self.bits}"
        return self.tag.value

    @classmethod
    def parse(cls, text):
        """'random-with-ta', 'discrete-phase-3', ..."""
        prefix = BaselineTag.DISCRETE_PHASE.value + "-"
        if text.startswith(prefix):
            try:
                bits = int(text[len(prefix) :])
            except ValueError:
                raise ValueError(f"bad bit count in {text!r}")
            return cls(BaselineTag.DISCRETE_PHASE, bits)
        try:
            return cls(BaselineTag(text))
        except ValueError:
            raise ValueError(f"unknown baseline {text!r}")


class BaselineFailure(SolverError):
    def __init__(self, kind, cause):
        super().__init__(f"{kind.name}: {cause}")
        self.kind = kind


def quantize_phases(w: ReflectVector, bits) -> ReflectVector:
    """Nearest point of {2 pi i / 2^bits}; ties go to the lower index."""
    if bits < 1:
        raise ValueError(f"bits must be at least 1, got {bits}")
    levels = 2**bits
    step = 2 * np.pi / levels
    index = np.mod(np.angle(w.w), 2 * np.pi) / step
    i = np.mod(np.ceil(index - 0.5 - 1e-9), levels)
    return ReflectVector(np.exp(1j * step * i), phase_tag=w.phase_tag)


def _random_solution(params, chans, config, with_ta):
    w0, wk = random_start(chans.N, chans.K, config.init_seed)
    if with_ta:
        times = allocate(compute_gains(params, chans, w0, wk), params.T)
    else:
        times = TimeAllocation.equal_split(params.T, chans.K)
    return Solution.evaluate(params, chans, w0, wk, times)


def _shared(w, K):
    return tuple(ReflectVector(w.w, phase_tag=k + 1) for k in range(K))


def _shared_terms(params, chans, w, times, fixed_side):
    """
    Log terms for the shared vector with one side of every product frozen at
    `w`: "uplink" freezes |w^H h_hat|^2, "downlink" freezes |w^H g_hat|^2.
    """
    terms = []
    for k in range(chans.K):
        tau = times.tau[k]
        if tau == 0:
            continue
        lam = params.eta * times.tau0 * params.P0 / (tau * params.sigma2)
        down, up = chans.cascaded_downlink(k), chans.cascaded_uplink(k)
        if fixed_side == "uplink":
            weights = [reflect_gain(w, h) for h in up]
            terms.append(LogTerm(tau, lam, weighted_gram(down, weights)))
        else:
            weights = [reflect_gain(w, g) for g in down]
            terms.append(LogTerm(tau, lam, weighted_gram(up, weights)))
    return terms


def same_irs(params, chans, config: BcaConfig, initial=None):
    """
    One reflect vector for every phase. The products |w^H g_hat|^2 |w^H h_hat|^2
    make the lifted objective non-concave, so each round freezes one factor at
    the current w, solves the other with SROCR, then swaps, then reallocates.
    """
    K, T = chans.K, params.T
    if initial is not None:
        w = initial.w0
    else:
        w, _ = random_start(chans.N, K, config.init_seed)
    times = allocate(compute_gains(params, chans, w, _shared(w, K)), T)

    def evaluate(w, times):
        return Solution.evaluate(params, chans, w, _shared(w, K), times).throughput

    R = evaluate(w, times)
    for rnd in range(1, config.max_rounds + 1):
        R_prev = R
        for side in ("uplink", "downlink"):
            terms = _shared_terms(params, chans, w, times, side)
            if not terms:
                break
            candidate, outcome = srocr_vector(
                log_subproblem(terms), config.srocr, w, 0, config.warm_start
            )
            if candidate is not None:
                R_new = evaluate(candidate, times)
                if R_new >= R:
                    w, R = candidate, R_new
            logger.debug(f"same-irs round {rnd} {side} half: {outcome}, R={R:.6g}")
        times = allocate(compute_gains(params, chans, w, _shared(w, K)), T)
        R = evaluate(w, times)
        if R <= 0 or (R - R_prev) / R < config.eps:
            break
    return Solution.evaluate(params, chans, w, _shared(w, K), times)


def _quadratic(v, W):
    """v^H W v, clipped at zero against rounding."""
    return max(0.0, float(np.real(np.vdot(v, W @ v))))


def _trace_gains(params, chans, W0, Wk) -> ClusterGains:
    scale = params.eta * params.P0 / params.sigma2
    gamma = []
    for k in range(chans.K):
        down, up = chans.cascaded_downlink(k), chans.cascaded_uplink(k)
        total = sum(_quadratic(g, W0) * _quadratic(h, Wk[k]) for g, h in zip(down, up))
        gamma.append(scale * total)
    return ClusterGains(tuple(gamma))


def upper_bound(params, chans, config: BcaConfig, initial: Solution):
    """
    Block ascent on the lifted matrices (W_0, {W_k}, durations) with the
    rank-one requirement dropped, started from the lifted `initial` solution.
    Every relaxed solve is exact, so the value never drops below `initial`.
    """
    K, T = chans.K, params.T
    W0 = initial.w0.lifted()
    Wk: List = [w.lifted() for w in initial.wk]

    def value(W0, Wk, times):
        return float(allocation_throughput(_trace_gains(params, chans, W0, Wk), times))

    times = allocate(_trace_gains(params, chans, W0, Wk), T)
    R = value(W0, Wk, times)
    for rnd in range(1, config.max_rounds + 1):
        R_prev = R
        terms = []
        for k in range(K):
            tau = times.tau[k]
            if tau == 0:
                continue
            lam = params.eta * times.tau0 * params.P0 / (tau * params.sigma2)
            weights = [_quadratic(h, Wk[k]) for h in chans.cascaded_uplink(k)]
            G = weighted_gram(chans.cascaded_downlink(k), weights)
            terms.append(LogTerm(tau, lam, G))
        if terms:
            W, status = solve_log_sdp(terms)
            if status.ok and value(W, Wk, times) >= R:
                W0, R = W, value(W, Wk, times)

        for k in range(K):
            if times.tau[k] == 0:
                continue
            weights = [_quadratic(g, W0) for g in chans.cascaded_downlink(k)]
            H = weighted_gram(chans.cascaded_uplink(k), weights)
            W, status = solve_linear_sdp(H)
            if status.ok:
                trial = Wk[:k] + [W] + Wk[k + 1 :]
                if value(W0, trial, times) >= R:
                    Wk, R = trial, value(W0, trial, times)

        times = allocate(_trace_gains(params, chans, W0, Wk), T)
        R = value(W0, Wk, times)
        logger.debug(f"upper bound round {rnd}: {R:.6g}")
        if R <= 0 or (R - R_prev) / R < config.eps:
            break
    return R


def discrete_phase(params, chans, proposed: Solution, bits):
    w0 = quantize_phases(proposed.w0, bits)
    wk = tuple(quantize_phases(w, bits) for w in proposed.wk)
    times = allocate(compute_gains(params, chans, w0, wk), params.T)
    return Solution.evaluate(params, chans, w0, wk, times)


def run_baseline(
    kind: BaselineKind,
    params,
    chans,
    config: Optional[BcaConfig] = None,
    initial: Optional[Solution] = None,
):
    """
    Run one comparison algorithm. `initial` is the start point of the
    optimizing baselines and, for the upper bound and discrete phases, the
    proposed solution they are derived from (computed here when absent).
    Solver failures are re-raised as BaselineFailure naming the baseline.
    """
    config = config or BcaConfig()
    tag = kind.tag
    try:
        if tag is BaselineTag.RANDOM_WITH_TA:
            return _random_solution(params, chans, config, with_ta=True)
        if tag is BaselineTag.RANDOM_NO_TA:
            return _random_solution(params, chans, config, with_ta=False)
        if tag is BaselineTag.OPTIMIZED_NO_TA:
            solution, _ = optimize(params, chans, config, initial, optimize_times=False)
            return solution
        if tag is BaselineTag.SAME_IRS_WITH_TA:
            return same_irs(params, chans, config, initial)
        if initial is None:
            initial, _ = optimize(params, chans, config)
        if tag is BaselineTag.UPPER_BOUND:
            return upper_bound(params, chans, config, initial)
        return discrete_phase(params, chans, initial, kind.bits)
    except (SolverError, ArithmeticError, np.linalg.LinAlgError) as e:
        if isinstance(e, BaselineFailure):
            raise
        raise BaselineFailure(kind, e) from e


def throughput_of(result):
    return result if isinstance(result, float) else result.throughput
