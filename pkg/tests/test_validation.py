import pytest

import irswpcn.validation
from irswpcn.bca import BcaConfig
from irswpcn.model import TimeAllocation
from irswpcn.validation import (
    CHECKS,
    check_cluster_trend,
    check_discrete_gap,
    check_grouping_trend,
    check_n_trend,
    check_time_allocation,
)

FAST = BcaConfig(max_rounds=5)


def test_time_allocation_check_passes():
    # Includes three-cluster draws whose optimum sits between coarse grid points.
    result = check_time_allocation(45)
    assert result.passed, result.line()
    assert result.line().startswith("PASS time-allocation:")


def test_time_allocation_check_reports_a_wrong_allocator(monkeypatch):
    def equal(gains, T):
        return TimeAllocation.equal_split(T, gains.K)

    monkeypatch.setattr(irswpcn.validation, "allocate", equal)
    assert not check_time_allocation(5).passed


def test_throughput_grows_with_n():
    result = check_n_trend(3, n_values=(2, 4, 8), clusters=(2, 2), bca=FAST)
    assert result.passed, result.line()


def test_discrete_phase_gap_shrinks_with_bits():
    result = check_discrete_gap(6, clusters=(2, 2), bca=FAST)
    assert result.passed, result.line()


@pytest.mark.parametrize("n", [4, 8])
def test_more_clusters_more_throughput(n):
    # Rayleigh channels keep the users' directions apart.
    result = check_cluster_trend(6, n_values=(n,), kappa=0.0, bca=FAST)
    assert result.passed, result.line()


def test_lcsd_random_scsd_order():
    result = check_grouping_trend(6, N=4, kappa=0.0, bca=FAST)
    assert result.passed, result.line()


def test_trend_checks_are_registered():
    names = {check.__name__ for check in CHECKS}
    assert {
        "check_n_trend",
        "check_discrete_gap",
        "check_cluster_trend",
        "check_grouping_trend",
    } <= names
