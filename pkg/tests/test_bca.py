import math

import numpy as np
import pytest

from irswpcn.bca import (
    BcaConfig,
    build_subproblem1,
    build_subproblem2,
    optimize,
    random_start,
)
from irswpcn.linalg import real_trace_product
from irswpcn.model import (
    Solution,
    SystemParams,
    TimeAllocation,
    cluster_throughput,
    generate_channels,
)
from irswpcn.oracles import exhaustive_throughput
from irswpcn.sdp import log_objective
from irswpcn.time_alloc import allocate, allocation_throughput, compute_gains


def instance(N, clusters, seed):
    params = SystemParams.evaluation_defaults(N=N, clusters=clusters)
    return params, generate_channels(params, seed)


def test_subproblem1_reproduces_throughput():
    params, chans = instance(4, (2, 3), 1)
    w0, wk = random_start(4, 2, 2)
    times = TimeAllocation(0.04, (0.035, 0.025))
    terms = build_subproblem1(params, chans, wk, times)
    expected = Solution.evaluate(params, chans, w0, wk, times).throughput
    assert log_objective(terms, w0.lifted()) == pytest.approx(expected, rel=1e-9)


def test_subproblem1_drops_empty_slots():
    params, chans = instance(4, (2, 3), 1)
    _, wk = random_start(4, 2, 2)
    terms = build_subproblem1(params, chans, wk, TimeAllocation(0.05, (0.05, 0.0)))
    assert len(terms) == 1
    with pytest.raises(ValueError):
        build_subproblem1(params, chans, wk, TimeAllocation(0.1, (0.0, 0.0)))


def test_subproblem2_reproduces_cluster_throughput():
    params, chans = instance(4, (2, 3), 3)
    w0, wk = random_start(4, 2, 4)
    tau0, tau = 0.05, 0.02
    for k in range(2):
        H = build_subproblem2(params, chans, w0, k)
        lam = params.eta * tau0 * params.P0 / (tau * params.sigma2)
        value = tau * math.log2(1 + lam * real_trace_product(H, wk[k].lifted()))
        assert value == pytest.approx(
            cluster_throughput(params, chans, w0, wk[k], tau0, tau, k), rel=1e-9
        )


def test_random_start_is_seeded():
    w0, wk = random_start(3, 2, 8)
    again, _ = random_start(3, 2, 8)
    assert np.array_equal(w0.w, again.w)
    assert [w.phase_tag for w in wk] == [1, 2]


def test_single_element_surface_reduces_to_allocation():
    params, chans = instance(1, (2, 1), 5)
    solution, report = optimize(params, chans)
    w0, wk = random_start(1, 2, 0)
    gains = compute_gains(params, chans, w0, wk)
    expected = allocation_throughput(gains, allocate(gains, params.T))
    assert solution.throughput == pytest.approx(expected, rel=1e-9)
    assert report.converged


@pytest.mark.parametrize("seed", range(3))
def test_micro_instance_near_exhaustive(seed):
    params, chans = instance(2, (1, 1), 100 + seed)
    solution, _ = optimize(params, chans, BcaConfig(init_seed=seed))
    best = exhaustive_throughput(params, chans)
    assert solution.throughput >= 0.98 * best
    assert solution.throughput <= 1.001 * best


@pytest.mark.parametrize("seed", range(2))
def test_monotone_trajectory_and_fixed_point(seed):
    params, chans = instance(4, (2, 2), 20 + seed)
    config = BcaConfig(init_seed=seed, max_rounds=10)
    solution, report = optimize(params, chans, config)
    steps = np.diff(report.objective_trajectory)
    assert np.all(steps >= -1e-8)
    assert report.rounds <= config.max_rounds
    assert len(report.per_round_timings) == report.rounds
    assert report.objective_trajectory[-1] == pytest.approx(solution.throughput)
    assert {block for _, block, _ in report.subproblem_statuses} == {"w0", "w1", "w2"}

    gains = compute_gains(params, chans, solution.w0, solution.wk)
    times = allocate(gains, params.T)
    assert times.tau0 == pytest.approx(solution.times.tau0, rel=1e-9)
    assert times.tau == pytest.approx(solution.times.tau, rel=1e-9)


def test_fixed_durations_stay_equal():
    params, chans = instance(4, (2, 2), 30)
    solution, _ = optimize(params, chans, BcaConfig(max_rounds=3), optimize_times=False)
    assert solution.times == TimeAllocation.equal_split(params.T, 2)


def test_initial_solution_is_never_worsened():
    params, chans = instance(4, (2, 1), 40)
    w0, wk = random_start(4, 2, 9)
    start = Solution.evaluate(
        params, chans, w0, wk, TimeAllocation.equal_split(params.T, 2)
    )
    solution, report = optimize(params, chans, BcaConfig(max_rounds=4), initial=start)
    assert solution.throughput >= start.throughput - 1e-12
    assert report.objective_trajectory[0] >= start.throughput - 1e-12


@pytest.mark.parametrize("changes", [dict(eps=0.0), dict(max_rounds=0)])
def test_config_validation(changes):
    with pytest.raises(ValueError):
        BcaConfig(**changes)
