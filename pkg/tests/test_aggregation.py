"""Aggregation operator and law harness tests."""

from __future__ import annotations

import random
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from valuetax import (
    MEAN,
    AggregationOperator,
    Law,
    check_all_laws,
    check_compensative_bounds,
    check_idempotence,
    check_monotonicity,
    check_symmetry,
    mean_aggregate,
    mean_invert,
)
from valuetax.errors import EmptyInput

importances = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
importance_tuples = st.lists(importances, min_size=1, max_size=8).map(tuple)

FIRST = AggregationOperator("first", lambda v: v[0])
SUM = AggregationOperator("sum", lambda v: sum(v))
NEGATED_MEAN = AggregationOperator("negated-mean", lambda v: -mean_aggregate(v))
ABOVE_MAX = AggregationOperator("above-max", lambda v: max(v) + 0.1)
MIN = AggregationOperator("min", lambda v: min(v))
MAX = AggregationOperator("max", lambda v: max(v))
MEDIAN = AggregationOperator("median", lambda v: statistics.median(v))


class TestMean:
    def test_two_values(self):
        assert mean_aggregate((0.8, 0.7)) == pytest.approx(0.75, abs=1e-12)

    def test_idempotent_on_constant_tuple(self):
        for i in (-1.0, -0.25, 0.0, 0.6, 1.0):
            assert mean_aggregate((i, i, i)) == pytest.approx(i, abs=1e-12)

    def test_symmetric_about_zero(self):
        assert mean_aggregate((-1.0, 1.0)) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            mean_aggregate(())

    @given(importance_tuples)
    def test_result_between_min_and_max(self, values):
        result = mean_aggregate(values)
        assert min(values) - 1e-12 <= result <= max(values) + 1e-12

    @given(importance_tuples, importances)
    def test_invert_restores_mean(self, known, parent):
        missing = mean_invert(parent, known)
        assert mean_aggregate(tuple(known) + (missing,)) == pytest.approx(parent, abs=1e-12)

    @given(importance_tuples, importances, st.integers(min_value=1, max_value=5))
    def test_invert_with_equal_split(self, known, parent, unknown_count):
        share = mean_invert(parent, known, unknown_count)
        full = tuple(known) + (share,) * unknown_count
        assert mean_aggregate(full) == pytest.approx(parent, abs=1e-12)


class TestLawChecks:
    def test_mean_passes_every_law(self):
        reports = check_all_laws(MEAN, trials=1000, rng=random.Random(7))
        assert all(report.passed for report in reports.values())
        assert all(report.counterexample is None for report in reports.values())

    def test_first_element_fails_symmetry_with_counterexample(self):
        report = check_symmetry(FIRST, trials=500, rng=random.Random(3))
        assert not report.passed
        values, permuted = report.counterexample
        assert sorted(values) == sorted(permuted)
        assert FIRST.apply(values) != FIRST.apply(permuted)

    def test_symmetry_vacuous_on_singletons(self):
        singles = [(x,) for x in (-1.0, 0.0, 0.5)]
        report = check_symmetry(FIRST, samples=singles, rng=random.Random(0))
        assert report.passed

    def test_sum_fails_idempotence(self):
        report = check_idempotence(SUM, samples=[0.5], rng=random.Random(5))
        assert not report.passed
        (constant,) = report.counterexample
        assert len(set(constant)) == 1

    def test_idempotence_includes_boundaries(self):
        # default sampling starts with -1 and 1; a clamping operator fails there
        clamped = AggregationOperator("clamp-half", lambda v: max(-0.5, min(0.5, mean_aggregate(v))))
        report = check_idempotence(clamped, trials=3, rng=random.Random(1))
        assert not report.passed

    def test_negated_mean_fails_monotonicity(self):
        report = check_monotonicity(NEGATED_MEAN, trials=500, rng=random.Random(11))
        assert not report.passed
        lo, hi = report.counterexample
        assert all(a <= b for a, b in zip(lo, hi))

    def test_monotonicity_with_equal_pairs_passes(self):
        pairs = [((0.1, -0.4), (0.1, -0.4)), ((1.0,), (1.0,))]
        assert check_monotonicity(MEAN, samples=pairs).passed

    def test_above_max_fails_compensative_bounds(self):
        report = check_compensative_bounds(ABOVE_MAX, trials=50, rng=random.Random(2))
        assert not report.passed

    def test_compensative_bounds_on_singletons(self):
        singles = [(-0.3,), (0.9,)]
        assert check_compensative_bounds(MEAN, samples=singles).passed
        assert not check_compensative_bounds(ABOVE_MAX, samples=singles).passed

    def test_failed_report_requires_counterexample(self):
        from valuetax import LawReport
        with pytest.raises(ValueError):
            LawReport(Law.SYMMETRY, passed=False)

    def test_idempotence_plus_monotonicity_imply_bounds(self):
        # sampled restatement: every operator that passes the first two
        # checks also stays within [min, max] on fresh samples
        operators = [MEAN, MIN, MAX, MEDIAN, FIRST, SUM, NEGATED_MEAN, ABOVE_MAX]
        for op in operators:
            rng = random.Random(31)
            idem = check_idempotence(op, trials=300, rng=rng)
            mono = check_monotonicity(op, trials=300, rng=rng)
            if idem.passed and mono.passed:
                assert check_compensative_bounds(op, trials=300, rng=rng).passed, op.name
