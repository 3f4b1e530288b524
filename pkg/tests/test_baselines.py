import cmath
import math

import numpy as np
import pytest

import irswpcn.baselines
from irswpcn.baselines import (
    BaselineFailure,
    BaselineKind,
    BaselineTag,
    quantize_phases,
    run_baseline,
    throughput_of,
)
from irswpcn.bca import BcaConfig, optimize
from irswpcn.model import (
    ReflectVector,
    Solution,
    SystemParams,
    TimeAllocation,
    generate_channels,
)
from irswpcn.sdp import SolverError

CONFIG = BcaConfig(max_rounds=5, init_seed=3)


@pytest.fixture(scope="module")
def instance():
    params = SystemParams.evaluation_defaults(N=4, clusters=(2, 2))
    chans = generate_channels(params, 77)
    proposed, _ = optimize(params, chans, CONFIG)
    return params, chans, proposed


def test_quantize_examples():
    w = quantize_phases(ReflectVector([cmath.exp(0.1j), cmath.exp(-0.1j)]), 1)
    assert np.allclose(w.w, [1, 1])
    tie = quantize_phases(ReflectVector([cmath.exp(1j * math.pi / 4)]), 2)
    assert np.allclose(tie.w, [1])
    upper = quantize_phases(ReflectVector([cmath.exp(3j * math.pi / 4)]), 2)
    assert np.allclose(upper.w, [1j])
    with pytest.raises(ValueError):
        quantize_phases(w, 0)


def test_quantize_is_idempotent():
    rng = np.random.default_rng(0)
    w = ReflectVector.random(16, rng, phase_tag=2)
    for bits in (1, 2, 3):
        once = quantize_phases(w, bits)
        assert once.phase_tag == 2
        assert np.allclose(quantize_phases(once, bits).w, once.w)
        levels = np.mod(np.angle(once.w), 2 * math.pi) / (2 * math.pi / 2**bits)
        assert np.allclose(levels, np.round(levels))


def test_kind_parse_and_name():
    kind = BaselineKind.parse("discrete-phase-3")
    assert kind.tag is BaselineTag.DISCRETE_PHASE
    assert kind.bits == 3
    assert kind.name == "discrete-phase-3"
    assert BaselineKind.parse("random-with-ta").name == "random-with-ta"
    with pytest.raises(ValueError):
        BaselineKind.parse("bogus")
    with pytest.raises(ValueError):
        BaselineKind.parse("discrete-phase-x")
    with pytest.raises(ValueError):
        BaselineKind(BaselineTag.DISCRETE_PHASE)
    with pytest.raises(ValueError):
        BaselineKind(BaselineTag.RANDOM_NO_TA, bits=2)


def test_random_baselines(instance):
    params, chans, _ = instance
    no_ta = run_baseline(BaselineKind(BaselineTag.RANDOM_NO_TA), params, chans, CONFIG)
    with_ta = run_baseline(
        BaselineKind(BaselineTag.RANDOM_WITH_TA), params, chans, CONFIG
    )
    assert no_ta.times == TimeAllocation.equal_split(params.T, 2)
    again = Solution.evaluate(params, chans, no_ta.w0, no_ta.wk, no_ta.times)
    assert no_ta.throughput == pytest.approx(again.throughput, rel=1e-12)
    assert np.array_equal(no_ta.w0.w, with_ta.w0.w)
    assert with_ta.throughput >= no_ta.throughput


def test_optimized_without_time_allocation(instance):
    params, chans, _ = instance
    kind = BaselineKind(BaselineTag.OPTIMIZED_NO_TA)
    solution = run_baseline(kind, params, chans, CONFIG)
    assert solution.times == TimeAllocation.equal_split(params.T, 2)
    assert solution.throughput > 0


def test_same_irs_shares_one_vector(instance):
    params, chans, _ = instance
    solution = run_baseline(
        BaselineKind(BaselineTag.SAME_IRS_WITH_TA), params, chans, CONFIG
    )
    for w in solution.wk:
        assert np.array_equal(w.w, solution.w0.w)
    assert solution.throughput > 0


def test_upper_bound_dominates_proposed(instance):
    params, chans, proposed = instance
    kind = BaselineKind(BaselineTag.UPPER_BOUND)
    bound = run_baseline(kind, params, chans, CONFIG, initial=proposed)
    assert isinstance(bound, float)
    assert throughput_of(bound) >= proposed.throughput * (1 - 1e-9)


def test_fine_quantization_is_nearly_lossless(instance):
    params, chans, proposed = instance
    kind = BaselineKind(BaselineTag.DISCRETE_PHASE, 16)
    solution = run_baseline(kind, params, chans, CONFIG, initial=proposed)
    assert abs(solution.throughput - proposed.throughput) <= 1e-3 * proposed.throughput
    assert throughput_of(solution) == solution.throughput


def test_solver_errors_name_the_baseline(instance, monkeypatch):
    params, chans, _ = instance

    def broken(*args, **kwargs):
        raise SolverError("no progress")

    monkeypatch.setattr(irswpcn.baselines, "same_irs", broken)
    kind = BaselineKind(BaselineTag.SAME_IRS_WITH_TA)
    with pytest.raises(BaselineFailure) as info:
        run_baseline(kind, params, chans, CONFIG)
    assert info.value.kind == kind
    assert "same-irs-with-ta" in str(info.value)
