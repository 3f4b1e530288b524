import cmath
import math

import numpy as np
import pytest
from conftest import random_hermitian, random_psd

from irswpcn.linalg import rank_one_ratio, real_trace_product
from irswpcn.sdp import LogTerm, SdpStatus, SdpStatusKind, log_objective
from irswpcn.srocr import (
    InitialInfeasible,
    SrocrConfig,
    SrocrStatus,
    extract_unit_modulus,
    linear_subproblem,
    log_subproblem,
    srocr_solve,
)


def test_rank_one_optimum_converges_at_once():
    a = np.exp(1j * np.array([0.0, 0.9, -2.1, 1.3]))
    W, report = srocr_solve(linear_subproblem(np.outer(a, a.conj())))
    assert report.status is SrocrStatus.CONVERGED
    assert report.iterations == 1
    assert report.final_ratio == pytest.approx(1.0, abs=1e-6)
    w = extract_unit_modulus(W)
    assert np.allclose(w.w, a * np.conj(a[0]), atol=1e-5)


@pytest.mark.parametrize("seed", range(3))
def test_two_element_reaches_closed_form(seed):
    C = random_psd(2, 2, seed)
    W, report = srocr_solve(linear_subproblem(C))
    assert not report.stalled
    w = extract_unit_modulus(W)
    best = np.real(C[0, 0] + C[1, 1]) + 2 * abs(C[1, 0])
    value = float(np.real(np.vdot(w.w, C @ w.w)))
    assert value == pytest.approx(best, rel=1e-5)


@pytest.mark.parametrize("seed", range(3))
def test_random_instance_contract(seed):
    W, report = srocr_solve(linear_subproblem(random_psd(4, 3, seed)))
    assert np.allclose(np.diag(W).real, 1, atol=1e-7)
    assert np.linalg.eigvalsh(W)[0] >= -1e-7
    assert report.v_trajectory[0] == 0.0
    assert len(report.v_trajectory) == report.iterations + 1
    assert len(report.objective_trajectory) == report.iterations + 1
    assert report.final_ratio == pytest.approx(rank_one_ratio(W), abs=1e-9)
    if not report.stalled:
        assert report.final_ratio >= 0.95
        assert report.v_trajectory[-1] >= 0.95


def test_log_subproblem():
    terms = [LogTerm(0.02, 2.0, random_psd(4, 1, k)) for k in range(3)]
    W, report = srocr_solve(log_subproblem(terms))
    w = extract_unit_modulus(W)
    assert log_objective(terms, w.lifted()) > 0
    assert report.objective_trajectory[0] >= log_objective(terms, w.lifted()) - 1e-7


def test_stall_test_alone_with_zero_eps1():
    W, report = srocr_solve(
        linear_subproblem(random_psd(4, 3, 11)), SrocrConfig(eps1=0.0)
    )
    assert report.status is SrocrStatus.CONVERGED
    assert abs(
        report.objective_trajectory[-1] - report.objective_trajectory[-2]
    ) <= 1e-3


def test_initial_failure_raises():
    def failing(v, anchor):
        return None, SdpStatus(SdpStatusKind.NUMERICAL_FAILURE), math.nan

    with pytest.raises(InitialInfeasible):
        srocr_solve(failing)


def test_stalled_keeps_best_iterate():
    def only_relaxed(v, anchor):
        if v == 0:
            return np.eye(2, dtype=complex), SdpStatus(SdpStatusKind.OPTIMAL), 1.0
        return None, SdpStatus(SdpStatusKind.INFEASIBLE), math.nan

    W, report = srocr_solve(only_relaxed, SrocrConfig(max_halvings=5))
    assert report.stalled
    assert report.halvings == 5
    assert report.iterations == 6
    assert np.allclose(W, np.eye(2))
    assert report.final_ratio == pytest.approx(0.5)

    _, report = srocr_solve(only_relaxed, SrocrConfig(max_halvings=0))
    assert report.stalled
    assert report.halvings == 0
    assert report.iterations == 1


def test_warm_start_anchor_is_used():
    seen = []
    C = random_psd(3, 2, 4)
    solve = linear_subproblem(C)

    def recording(v, anchor):
        if v > 0 and not seen:
            seen.append(anchor)
        return solve(v, anchor)

    anchor = np.ones((3, 3), dtype=complex)
    srocr_solve(recording, anchor=anchor)
    assert seen and np.allclose(seen[0], anchor)


@pytest.mark.parametrize(
    "changes",
    [
        dict(eps1=1.5),
        dict(eps1=-0.1),
        dict(delta0=0.0),
        dict(eps2=0.0),
        dict(max_iters=0),
    ],
)
def test_config_validation(changes):
    with pytest.raises(ValueError):
        SrocrConfig(**changes)


def test_extract_ones():
    w = extract_unit_modulus(np.ones((3, 3)))
    assert np.allclose(w.w, 1)
    assert not w.degenerate


def test_extract_known_phase():
    a = np.array([1, cmath.exp(1j * math.pi / 3)])
    w = extract_unit_modulus(np.outer(a, a.conj()))
    assert np.allclose(w.w, a)
    rotated = cmath.exp(0.7j) * a
    assert np.allclose(extract_unit_modulus(np.outer(rotated, rotated.conj())).w, a)


def test_extract_near_rank_one():
    a = np.exp(1j * np.array([0.0, 0.5, 2.5, -1.0]))
    W = np.outer(a, a.conj()) + 0.005 * random_hermitian(4, 3)
    w = extract_unit_modulus(W, phase_tag=4)
    assert w.phase_tag == 4
    assert np.max(np.abs(np.angle(w.w / a))) <= 0.05


def test_extract_zero_entry_is_degenerate():
    w = extract_unit_modulus(np.diag([1.0, 0.0]).astype(complex))
    assert w.degenerate
    assert np.allclose(w.w, [1, 1])


def test_linear_subproblem_objective_is_normalized():
    C = random_psd(3, 1, 5)
    W, status, value = linear_subproblem(C)(0.0, None)
    assert status.ok
    lam = np.linalg.eigvalsh(C)[-1]
    assert value == pytest.approx(real_trace_product(C, W) / (3 * lam))
    assert 0 <= value <= 1 + 1e-9
