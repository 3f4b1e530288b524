"""
Oracle and property checks run by `irswpcn validate`. Each check draws its
instances from derived seeds and reports one CheckResult.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from irswpcn.baselines import BaselineKind, BaselineTag, run_baseline
from irswpcn.bca import (
    BcaConfig,
    build_subproblem1,
    build_subproblem2,
    optimize,
    random_start,
)
from irswpcn.checksum import derive_seed
from irswpcn.experiments import PROPOSED, ExperimentConfig, run_monte_carlo
from irswpcn.linalg import rank_one_ratio
from irswpcn.model import SystemParams, TimeAllocation, generate_channels
from irswpcn.oracles import (
    exhaustive_throughput,
    phase_grid_linear,
    phase_grid_log,
    refine_allocation,
    simplex_grid_allocation,
)
from irswpcn.sdp import log_objective
from irswpcn.srocr import (
    extract_unit_modulus,
    linear_subproblem,
    log_subproblem,
    srocr_solve,
)
from irswpcn.time_alloc import (
    ClusterGains,
    allocate,
    allocation_throughput,
    solve_root,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _seed(*parts):
    return derive_seed("validate", *parts)


def check_time_allocation(seeds, T=1.0):
    """
    `allocate` against a simplex grid refined down to 1e-5 T around its
    optimum. The grid is only a lower bound on the optimal objective; the
    durations must agree within 1e-3 T and the objectives within 1e-4.
    """
    worst_tau, worst_gap = 0.0, 0.0
    for s in range(seeds):
        rng = np.random.default_rng(_seed("time", s))
        K = int(rng.integers(1, 4))
        gains = ClusterGains(tuple(rng.exponential(5.0, size=K)))
        times = allocate(gains, T)
        value = allocation_throughput(gains, times)
        step = (1e-2 if K == 3 else 1e-3) * T
        _, tau0, tau = simplex_grid_allocation(gains.gamma, T, step)
        grid, tau0, tau = refine_allocation(gains.gamma, T, tau0, tau, step, 1e-5 * T)
        if grid > value * (1 + 1e-9):
            detail = f"grid beats allocate, seed {s}"
            return CheckResult("time-allocation", False, detail)
        deviation = max(abs(times.tau0 - tau0), *np.abs(np.subtract(times.tau, tau)))
        worst_tau = max(worst_tau, deviation / T)
        worst_gap = max(worst_gap, (value - grid) / value)
    root_error = abs(solve_root(1.0) - (math.e - 1))
    passed = worst_tau <= 1e-3 and worst_gap <= 1e-4 and root_error <= 1e-9
    return CheckResult(
        "time-allocation",
        passed,
        f"max duration error {worst_tau:.2e} T, max relative gap {worst_gap:.2e}, "
        f"root error {root_error:.1e}",
    )


def _n2_instance(s, clusters):
    params = SystemParams.evaluation_defaults(N=2, clusters=clusters)
    chans = generate_channels(params, _seed("instance", s))
    w0, wk = random_start(2, len(clusters), _seed("phases", s))
    return params, chans, w0, wk


def check_srocr_phase_grid(seeds):
    worst = 1.0
    for s in range(seeds):
        params, chans, w0, wk = _n2_instance(s, (2,))
        H = build_subproblem2(params, chans, w0, 0)
        W, _ = srocr_solve(linear_subproblem(H))
        w = extract_unit_modulus(W)
        ratio = float(np.real(np.vdot(w.w, H @ w.w))) / phase_grid_linear(H)
        worst = min(worst, ratio)

        times = TimeAllocation.equal_split(params.T, chans.K)
        terms = build_subproblem1(params, chans, wk, times)
        W, _ = srocr_solve(log_subproblem(terms))
        w = extract_unit_modulus(W)
        worst = min(worst, log_objective(terms, w.lifted()) / phase_grid_log(terms))
    return CheckResult(
        "srocr-vs-phase-grid", worst >= 0.99, f"worst fraction of optimum {worst:.4f}"
    )


def check_micro_bca(seeds):
    worst = 1.0
    for s in range(seeds):
        params = SystemParams.evaluation_defaults(N=2, clusters=(1, 1))
        chans = generate_channels(params, _seed("micro", s))
        solution, _ = optimize(params, chans, BcaConfig(init_seed=_seed("init", s)))
        worst = min(worst, solution.throughput / exhaustive_throughput(params, chans))
    return CheckResult(
        "micro-bca-vs-exhaustive", worst >= 0.98, f"worst fraction {worst:.4f}"
    )


def check_monotone_ascent(seeds):
    worst_step = math.inf
    for s in range(seeds):
        params = SystemParams.evaluation_defaults(N=8, clusters=(2, 2))
        chans = generate_channels(params, _seed("ascent", s))
        config = BcaConfig(init_seed=_seed("init", s))
        _, report = optimize(params, chans, config)
        steps = np.diff(report.objective_trajectory)
        worst_step = min(worst_step, float(np.min(steps)) if steps.size else 0.0)
        if report.rounds > config.max_rounds:
            detail = f"round cap exceeded, seed {s}"
            return CheckResult("monotone-ascent", False, detail)
    return CheckResult(
        "monotone-ascent", worst_step >= -1e-8, f"smallest round step {worst_step:.2e}"
    )


def check_srocr_contract(seeds):
    worst_ratio, worst_diag, worst_modulus = 1.0, 0.0, 0.0
    for s in range(seeds):
        params = SystemParams.evaluation_defaults(N=4, clusters=(3,))
        chans = generate_channels(params, _seed("contract", s))
        w0, _ = random_start(4, 1, _seed("phases", s))
        H = build_subproblem2(params, chans, w0, 0)
        W, _ = srocr_solve(linear_subproblem(H))
        w = extract_unit_modulus(W)
        worst_ratio = min(worst_ratio, rank_one_ratio(W))
        worst_diag = max(worst_diag, float(np.max(np.abs(np.diag(W) - 1))))
        worst_modulus = max(worst_modulus, float(np.max(np.abs(np.abs(w.w) - 1))))
    passed = worst_ratio >= 0.95 and worst_diag <= 1e-7 and worst_modulus <= 1e-9
    return CheckResult(
        "srocr-contract",
        passed,
        f"min ratio {worst_ratio:.4f}, diag error {worst_diag:.1e}, "
        f"modulus error {worst_modulus:.1e}",
    )


def _desk_params(**system):
    fields = dict(N=8, clusters=(2, 2, 2))
    fields.update(system)
    return SystemParams.evaluation_defaults(**fields)


def _sweep_means(base, sweep_name, values, seeds, bca, **fields):
    config = ExperimentConfig(
        base=base,
        sweep_name=sweep_name,
        sweep_values=values,
        realizations=seeds,
        base_seed=_seed(sweep_name),
        algorithms=(PROPOSED,),
        bca=bca or BcaConfig(),
        name=f"{sweep_name}-trend",
        **fields,
    )
    return [row.mean_throughput for row in run_monte_carlo(config)]


def _listing(means):
    return ", ".join(f"{m:.4f}" for m in means)


def check_n_trend(seeds, n_values=(4, 8, 16), bca=None, **system):
    """Mean throughput strictly increasing in N."""
    base = _desk_params(N=n_values[0], **system)
    means = _sweep_means(base, "n", n_values, seeds, bca)
    passed = all(a < b for a, b in zip(means, means[1:]))
    return CheckResult("throughput-vs-n", passed, f"means {_listing(means)}")


def check_discrete_gap(seeds, bits=(1, 2, 3), bca=None, **system):
    """Mean loss of phase quantization positive and shrinking as bits grow."""
    params = _desk_params(**system)
    gaps = np.zeros(len(bits))
    for s in range(seeds):
        chans = generate_channels(params, _seed("bits", s))
        config = dataclasses.replace(bca or BcaConfig(), init_seed=_seed("init", s))
        proposed, _ = optimize(params, chans, config)
        for i, b in enumerate(bits):
            kind = BaselineKind(BaselineTag.DISCRETE_PHASE, b)
            discrete = run_baseline(kind, params, chans, config, initial=proposed)
            gaps[i] += (proposed.throughput - discrete.throughput) / seeds
    passed = gaps[-1] > 0 and all(a >= b for a, b in zip(gaps, gaps[1:]))
    return CheckResult("discrete-phase-gap", passed, f"mean gaps {_listing(gaps)}")


def check_cluster_trend(seeds, n_values=(4, 8), bca=None, **system):
    """K = M beats an intermediate K, which beats K = 1, on paired channels."""
    setups = ((1,) * 6, (2, 2, 2), (6,))
    details, passed = [], True
    for n in n_values:
        base = _desk_params(N=n, clusters=setups[0], **system)
        means = _sweep_means(base, "clusters", setups, seeds, bca)
        passed = passed and all(a > b for a, b in zip(means, means[1:]))
        details.append(f"N={n}: {_listing(means)}")
    return CheckResult("clusters-trend", passed, "; ".join(details))


def check_grouping_trend(seeds, bca=None, **system):
    """LCSD >= random >= SCSD with user distances drawn in [5, 15] m."""
    schemes = ("lcsd", "random", "scsd")
    means = _sweep_means(
        _desk_params(**system),
        "grouping",
        schemes,
        seeds,
        bca,
        distance_range=(5.0, 15.0),
    )
    passed = all(a >= b for a, b in zip(means, means[1:]))
    detail = ", ".join(f"{s} {m:.4f}" for s, m in zip(schemes, means))
    return CheckResult("grouping-trend", passed, detail)


CHECKS = (
    check_time_allocation,
    check_srocr_phase_grid,
    check_micro_bca,
    check_monotone_ascent,
    check_srocr_contract,
    check_n_trend,
    check_discrete_gap,
    check_cluster_trend,
    check_grouping_trend,
)



def run_validation(seeds=5):
    results = []
    for check in CHECKS:
        result = check(seeds)
        logger.info(result.line())
        results.append(result)
    return results
