import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lidar_cover import bootstrap_ci, p_opt, relaxed_optimum_threshold, samples_to_solution, tts
from lidar_cover.errors import ValidationError
from lidar_cover.metrics import REPORT_COLUMNS, evaluate, p_opt_rel
from lidar_cover.sampler import SampleRecord, SampleSet, SamplerParams


def sample_set(objectives, feasible):
    recs = tuple(SampleRecord(r, (), 0.0, o, f) for r, (o, f) in
                 enumerate(zip(objectives, feasible)))
    return SampleSet(recs, SamplerParams(reads=len(recs)), "t", 0, 0, ())


def test_anchor_one_in_a_thousand():
    # ln(0.01) / ln(0.999) = 4602.87
    assert samples_to_solution(0.001) == pytest.approx(4603, abs=1)


def test_anchor_zero_and_one():
    assert samples_to_solution(0) == 5000
    assert samples_to_solution(0.0) == 5000.0
    assert samples_to_solution(1) == 1


def test_cap():
    assert samples_to_solution(1e-6) == 5000


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_bad_probability(p):
    with pytest.raises(ValidationError):
        samples_to_solution(p)


@settings(max_examples=200)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_monotone_non_increasing(a, b):
    lo, hi = sorted((a, b))
    assert samples_to_solution(hi) <= samples_to_solution(lo)
    assert 1.0 <= samples_to_solution(a) <= 5000.0


def test_p_opt_counts_feasible_optima_only():
    ss = sample_set([2, 2, 3, 1, 2], [True, False, True, False, True])
    assert p_opt(ss, 2) == pytest.approx(0.4)


def test_relaxed():
    assert relaxed_optimum_threshold(10) == pytest.approx(11.0)
    ss = sample_set([10, 11, 12, 11], [True, True, True, False])
    assert p_opt_rel(ss, 10) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        relaxed_optimum_threshold(0)


def test_tts():
    assert tts(0.5, 2.0) == pytest.approx(2.0 * math.log(0.01) / math.log(0.5))
    with pytest.raises(ValidationError):
        tts(0.5, 0.0)


def test_bootstrap_constant_values():
    assert bootstrap_ci([3.0] * 20) == (3.0, 3.0)


def test_bootstrap_contains_mean_and_is_seeded():
    values = np.random.default_rng(0).random(200)
    lo, hi = bootstrap_ci(values, seed=4)
    assert lo <= values.mean() <= hi
    assert bootstrap_ci(values, seed=4) == (lo, hi)
    assert bootstrap_ci(values, level=0.5, seed=4)[1] - bootstrap_ci(values, level=0.5, seed=4)[0] \
        < hi - lo


def test_bootstrap_empty():
    with pytest.raises(ValidationError):
        bootstrap_ci([])


def test_evaluate_report_row():
    ss = sample_set([1] * 3 + [2] * 7, [True] * 10)
    rep = evaluate(ss, 1, t_s=0.01)
    assert rep.p_opt == pytest.approx(0.3)
    assert rep.s_p == pytest.approx(math.log(0.01) / math.log(0.7))
    assert rep.tts == pytest.approx(rep.s_p * 0.01)
    assert rep.ci_low <= rep.s_p_rel <= rep.ci_high
    row = rep.row("toy-1", "binary", 1.5, 100, 0)
    assert list(row) == list(REPORT_COLUMNS)
    assert row["tts"] != ""
    assert evaluate(ss, 1).row("x", "binary", 1.5, 100, 0)["tts"] == ""


def test_low_significance_flag():
    ss = sample_set([2] * 10, [True] * 10)
    assert evaluate(ss, 1).low_significance
    assert evaluate(ss, 1).s_p == 5000


def test_empty_samples():
    with pytest.raises(ValidationError):
        p_opt(sample_set([], []), 1)
