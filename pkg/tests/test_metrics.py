"""Metric core: formula oracles, hand values, and invariants."""

from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gts.errors import DomainError, UndefinedMetricError
from gts.metrics import (
    AspectScores,
    Interval,
    MetricScores,
    aggregate_au,
    coefficient_of_variation,
    extract_choice,
    f_iou,
    f_iou_max,
    gamma,
    interval_iou,
    interval_set_iou,
    jeaug,
    qa_accuracy,
)

mpmath.mp.dps = 50


def f_iou_oracle(decile: int) -> float:
    """High-precision evaluation of the grounding score for an exact decile."""
    k = min(decile, 7)
    val = mpmath.mpf("0.63") / mpmath.log(10) * mpmath.log(mpmath.mpf("0.7") * k + 1) + mpmath.mpf("0.5")
    return float(val)


def gamma_oracle(t: int) -> float:
    tm = mpmath.mpf(t)
    sat = 1 - mpmath.exp(-((tm / 100) ** 3))
    gate = 1 / (1 + mpmath.exp(mpmath.mpf("-0.03") * (tm - 100)))
    return float(1 + mpmath.mpf("0.25") * sat * gate)


class TestFIou:
    def test_examples(self):
        assert f_iou(0.0) == 0.5
        assert f_iou(0.3) == pytest.approx(0.8096, abs=5e-4)
        assert f_iou(0.7) == pytest.approx(0.9856, abs=5e-4)
        assert f_iou(0.7) == f_iou(1.0)

    def test_grid_matches_high_precision_oracle(self):
        for i in range(0, 10001):
            expected = f_iou_oracle(i // 1000)
            assert abs(f_iou(i / 10000) - expected) <= 1e-12, f"grid point {i}/10000"

    def test_plateau_and_deciles(self):
        plateau = f_iou(0.7)
        grid = [i / 1000 for i in range(0, 1001)]
        prev = -math.inf
        for x in grid:
            val = f_iou(x)
            assert val >= prev
            prev = val
            if x >= 0.7:
                assert val == plateau
            else:
                k = math.floor(10 * x)
                assert val == f_iou(k / 10)

    def test_f_iou_max_is_plateau(self):
        assert f_iou_max() == f_iou(0.7) == f_iou(1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            f_iou(-0.01)
        with pytest.raises(DomainError):
            f_iou(1.01)


class TestGamma:
    def test_fixed_points(self):
        assert gamma(0) == 1.0
        assert gamma(100) == pytest.approx(1.0790, abs=1e-4)
        assert gamma(300) == pytest.approx(1.2494, abs=1e-4)
        assert gamma(100) == pytest.approx(gamma_oracle(100), abs=1e-12)
        assert gamma(10) == pytest.approx(gamma_oracle(10), abs=1e-12)

    def test_range_and_monotone(self):
        # The true supremum 1.25 - O(1e-130) is below double resolution for
        # large T, so float64 values may round to 1.25 exactly; strictness is
        # asserted separately against the high-precision oracle.
        prev = 0.0
        for t in range(0, 10001):
            g = gamma(t)
            assert 1.0 <= g <= 1.25
            assert g >= prev
            prev = g

    def test_strictly_below_bound_in_exact_arithmetic(self):
        with mpmath.workdps(300):
            for t in (500, 1325, 5000, 10000):
                tm = mpmath.mpf(t)
                sat = 1 - mpmath.exp(-((tm / 100) ** 3))
                gate = 1 / (1 + mpmath.exp(mpmath.mpf("-0.03") * (tm - 100)))
                exact = 1 + mpmath.mpf("0.25") * sat * gate
                assert exact < mpmath.mpf("1.25")
                assert abs(gamma(t) - float(exact)) <= 2.3e-16

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma(-1)


class TestJeaug:
    def test_clamp_path(self):
        scores = jeaug(10.0, 0.7, 100)
        assert scores.grounding_factor == 1.0
        assert scores.jeaug == pytest.approx(10.0, abs=1e-9)

    def test_minimum(self):
        scores = jeaug(1.0, 0.0, 0)
        assert scores.jeaug == 0.5
        assert scores.gamma == 1.0
        assert scores.f_iou == 0.5

    def test_low_iou_short_video(self):
        # Independent recomputation: gamma(10) = 1.0000157..., F(0) = 0.5.
        expected = min(gamma_oracle(10) * f_iou_oracle(0), 1.0) * 6.0
        scores = jeaug(6.0, 0.0, 10)
        assert scores.jeaug == pytest.approx(expected, abs=1e-12)
        assert scores.jeaug == pytest.approx(3.0, abs=1e-4)

    def test_exact_composition(self):
        scores = jeaug(7.3, 0.45, 640)
        assert scores.jeaug == scores.grounding_factor * scores.au_score
        assert scores.grounding_factor == min(scores.gamma * scores.f_iou, 1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            jeaug(0.5, 0.5, 10)
        with pytest.raises(DomainError):
            jeaug(10.5, 0.5, 10)

    @settings(max_examples=300, deadline=None)
    @given(
        au=st.floats(min_value=1.0, max_value=10.0),
        iou=st.floats(min_value=0.0, max_value=1.0),
        t=st.integers(min_value=0, max_value=5000),
    )
    def test_invariants(self, au, iou, t):
        scores = jeaug(au, iou, t)
        assert 0.5 <= scores.jeaug <= 10.0
        assert scores.grounding_factor <= 1.0
        assert scores.jeaug == scores.grounding_factor * au

    @settings(max_examples=200, deadline=None)
    @given(
        au=st.floats(min_value=1.0, max_value=9.0),
        iou=st.floats(min_value=0.0, max_value=0.9),
        t=st.integers(min_value=0, max_value=2000),
        d_au=st.floats(min_value=0.0, max_value=1.0),
        d_iou=st.floats(min_value=0.0, max_value=0.1),
        d_t=st.integers(min_value=0, max_value=500),
    )
    def test_monotone_in_each_argument(self, au, iou, t, d_au, d_iou, d_t):
        base = jeaug(au, iou, t).jeaug
        assert jeaug(au + d_au, iou, t).jeaug >= base
        assert jeaug(au, min(iou + d_iou, 1.0), t).jeaug >= base
        assert jeaug(au, iou, t + d_t).jeaug >= base


class TestIntervalIou:
    def test_examples(self):
        assert interval_iou(Interval(start=0, end=10), Interval(start=0, end=10)) == 1.0
        assert interval_iou(Interval(start=0, end=10), Interval(start=20, end=30)) == 0.0
        assert interval_iou(Interval(start=0, end=10), Interval(start=5, end=15)) == pytest.approx(5 / 15)

    def test_symmetry_and_identity(self):
        import random

        rng = random.Random(7)
        for _ in range(200):
            a = sorted(rng.sample(range(0, 100), 2))
            b = sorted(rng.sample(range(0, 100), 2))
            ia, ib = Interval(start=a[0], end=a[1]), Interval(start=b[0], end=b[1])
            assert interval_iou(ia, ib) == interval_iou(ib, ia)
            assert (interval_iou(ia, ib) == 1.0) == (ia == ib)

    def test_set_iou(self):
        pred = [Interval(start=0, end=10)]
        truth = [Interval(start=0, end=5), Interval(start=8, end=12)]
        # intersection 5 + 2 = 7, union 10 + 9 - 7 = 12
        assert interval_set_iou(pred, truth) == pytest.approx(7 / 12)
        assert interval_set_iou([], truth) == 0.0
        assert interval_set_iou([], []) == 1.0
        # overlapping truth intervals merge before counting
        truth2 = [Interval(start=0, end=6), Interval(start=4, end=10)]
        assert interval_set_iou(pred, truth2) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            Interval(start=5, end=5)
        with pytest.raises(ValueError):
            Interval(start=-1, end=5)


class TestAggregateAu:
    def test_examples(self):
        assert aggregate_au(AspectScores(subject=10, scene=10, course_of_events=10, impact=10)) == 10.0
        assert aggregate_au(AspectScores(subject=1, scene=1, course_of_events=1, impact=1)) == 1.0
        assert aggregate_au(AspectScores(subject=4, scene=6, course_of_events=8, impact=10)) == 7.0

    def test_range_enforced(self):
        with pytest.raises(ValueError):
            AspectScores(subject=0, scene=5, course_of_events=5, impact=5)
        with pytest.raises(ValueError):
            AspectScores(subject=11, scene=5, course_of_events=5, impact=5)


class TestQaAccuracy:
    def test_examples(self):
        assert qa_accuracy([(0, 0), (1, 1)]) == 1.0
        assert qa_accuracy([(0, 1), (2, 1)]) == 0.0
        assert qa_accuracy([(0, 0), (1, 1), (2, 2), (0, 3)]) == 0.75
        assert qa_accuracy([(None, 0), (1, 1)]) == 0.5

    def test_empty(self):
        with pytest.raises(UndefinedMetricError):
            qa_accuracy([])


class TestCoefficientOfVariation:
    def test_examples(self):
        assert coefficient_of_variation([5, 5, 5, 5, 5]) == 0.0
        assert coefficient_of_variation([2, 4]) == pytest.approx(33.33, abs=0.01)
        assert coefficient_of_variation([1, 2, 3]) == pytest.approx(40.82, abs=0.01)

    def test_errors(self):
        with pytest.raises(DomainError):
            coefficient_of_variation([1.0])
        with pytest.raises(UndefinedMetricError):
            coefficient_of_variation([-1.0, 1.0])


class TestExtractChoice:
    def test_basic(self):
        assert extract_choice("The answer is B.", 4) == 1
        assert extract_choice("b", 4) == 1
        assert extract_choice("I think (C) fits best", 4) == 2
        assert extract_choice("no idea", 4) is None
        assert extract_choice("", 4) is None

    def test_respects_option_count(self):
        # 'E' is not an available option here, so the later 'a' wins.
        assert extract_choice("E or maybe a", 2) == 0
        # Letters inside words never match.
        assert extract_choice("Abort: answer disabled", 5) is None

    def test_domain(self):
        with pytest.raises(DomainError):
            extract_choice("A", 0)
        with pytest.raises(DomainError):
            extract_choice("A", 6)


def test_metric_scores_model_roundtrip():
    scores = jeaug(6.0, 0.33, 240)
    clone = MetricScores.model_validate_json(scores.model_dump_json())
    assert clone == scores
