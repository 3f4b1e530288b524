import dataclasses
import math

import numpy as np
import pytest

from irswpcn.bca import random_start
from irswpcn.model import SystemParams, generate_channels
from irswpcn.oracles import refine_allocation, simplex_grid_allocation
from irswpcn.time_alloc import (
    ClusterGains,
    allocate,
    allocation_throughput,
    compute_gains,
    solve_root,
    stationarity_residual,
)


def test_root_special_values():
    assert solve_root(0.0) == 0.0
    assert solve_root(1.0) == pytest.approx(math.e - 1, abs=1e-10)
    x = solve_root(10.0)
    assert abs(stationarity_residual(x, 10.0)) <= 1e-9
    assert (1 + x) * math.log1p(x) - x == pytest.approx(10.0, rel=1e-10)


def test_root_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_root(-1.0)
    with pytest.raises(ValueError):
        solve_root(math.inf)


def test_single_cluster_example():
    gains = ClusterGains((1.0,))
    times = allocate(gains, 1.0)
    assert times.tau0 == pytest.approx(0.63212, abs=1e-5)
    assert times.tau[0] == pytest.approx(0.36788, abs=1e-5)
    assert allocation_throughput(gains, times) == pytest.approx(0.53074, abs=1e-5)


def test_clusters_share_one_ratio():
    gains = ClusterGains((2.0, 5.0, 0.5))
    times = allocate(gains, 0.1)
    assert times.total == pytest.approx(0.1)
    x = solve_root(gains.total)
    for g, t in zip(gains.gamma, times.tau):
        assert g * times.tau0 / t == pytest.approx(x)


def test_two_clusters_against_simplex_grid():
    gains = ClusterGains((2.0, 5.0))
    value = allocation_throughput(gains, allocate(gains, 1.0))
    grid, _, _ = simplex_grid_allocation(gains.gamma, 1.0, 1e-3)
    assert grid <= value + 1e-9
    assert value - grid <= 1e-3 * value


def test_refined_grid_locates_the_allocation():
    gains = ClusterGains((0.05, 9.17, 0.82))
    times = allocate(gains, 1.0)
    value = allocation_throughput(gains, times)
    _, tau0, tau = simplex_grid_allocation(gains.gamma, 1.0, 1e-2)
    grid, tau0, tau = refine_allocation(gains.gamma, 1.0, tau0, tau, 1e-2, 1e-5)
    assert grid <= value * (1 + 1e-12)
    assert value - grid <= 1e-4 * value
    assert tau0 == pytest.approx(times.tau0, abs=1e-3)
    assert tau == pytest.approx(times.tau, abs=1e-3)
    assert tau0 + sum(tau) == pytest.approx(1.0)


def test_allocation_dominates_random_feasible_points():
    rng = np.random.default_rng(21)
    for _ in range(5):
        K = int(rng.integers(1, 4))
        gamma = rng.exponential(5.0, size=K)
        gains = ClusterGains(tuple(gamma))
        best = allocation_throughput(gains, allocate(gains, 1.0))
        points = rng.dirichlet(np.ones(K + 1), size=10_000)
        tau0, tau = points[:, :1], points[:, 1:]
        values = np.sum(tau * np.log2(1 + gamma * tau0 / tau), axis=1)
        assert np.max(values) <= best * (1 + 1e-12)


def test_duration_homogeneity():
    gains = ClusterGains((3.0, 0.7))
    base = allocate(gains, 1.0)
    scaled = allocate(gains, 0.25)
    assert scaled.tau0 == pytest.approx(0.25 * base.tau0)
    assert scaled.tau == pytest.approx(tuple(0.25 * t for t in base.tau))
    assert allocation_throughput(gains, scaled) == pytest.approx(
        0.25 * allocation_throughput(gains, base)
    )


def test_zero_gain_cluster_gets_no_slot():
    gains = ClusterGains((0.0, 4.0))
    times = allocate(gains, 1.0)
    assert times.tau[0] == 0.0
    assert times.tau[1] > 0


def test_degenerate_gains():
    gains = ClusterGains((0.0, 0.0))
    assert gains.degenerate
    times = allocate(gains, 0.1)
    assert times.tau0 == pytest.approx(0.1)
    assert times.tau == (0.0, 0.0)
    assert allocation_throughput(gains, times) == 0.0


def test_gain_validation():
    with pytest.raises(ValueError):
        ClusterGains(())
    with pytest.raises(ValueError):
        ClusterGains((1.0, -1.0))
    with pytest.raises(ValueError):
        allocate(ClusterGains((1.0,)), 0.0)
    two = allocate(ClusterGains((1.0, 1.0)), 1.0)
    with pytest.raises(ValueError):
        allocation_throughput(ClusterGains((1.0,)), two)


def test_noise_doubling_halves_gains():
    params = SystemParams.evaluation_defaults(N=4, clusters=(2, 2))
    chans = generate_channels(params, 17)
    w0, wk = random_start(4, 2, 3)
    gains = compute_gains(params, chans, w0, wk)
    noisier = compute_gains(
        dataclasses.replace(params, sigma2=2 * params.sigma2), chans, w0, wk
    )
    assert np.allclose(noisier.gamma, np.array(gains.gamma) / 2)
    assert all(g > 0 for g in gains.gamma)


def test_gains_follow_grouping():
    params = SystemParams.evaluation_defaults(N=4, clusters=(2, 2))
    chans = generate_channels(params, 18)
    w0, wk = random_start(4, 2, 5)
    swapped = compute_gains(params, chans, w0, wk, grouping=((2, 3), (0, 1)))
    direct = compute_gains(params, chans.regroup(((2, 3), (0, 1))), w0, wk)
    assert swapped.gamma == direct.gamma
