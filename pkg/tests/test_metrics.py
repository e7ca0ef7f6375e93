"""Utility summaries and the risk-curve table."""

import math

import numpy as np
import pytest

from countsynth import (
    ContingencyTable,
    ValidationError,
    bucket_differences,
    mean_absolute_deviation,
    percentage_differences,
    poisson_delta,
    risk_curve,
    schema_from_lists,
    synth_poisson,
)


def table_of(counts):
    schema = schema_from_lists(
        [("v", [f"c{i}" for i in range(len(counts))])]
    )
    return ContingencyTable(schema, np.asarray(counts, dtype=np.int64))


class TestBucketDifferences:
    def test_handcrafted(self):
        original = table_of([1, 2, 0, 2])
        synthetic = table_of([2, 1, 3, 2])
        pools = bucket_differences(original, synthetic)
        assert pools[1].tolist() == [100.0]
        assert sorted(pools[2].tolist()) == [-50.0, 0.0]
        for c in range(3, 11):
            assert pools[c].size == 0

    def test_zero_cells_excluded(self):
        original = table_of([0, 0, 1])
        synthetic = table_of([5, 7, 1])
        pools = bucket_differences(original, synthetic)
        assert sum(p.size for p in pools.values()) == 1

    def test_pooling_across_replicates(self):
        original = table_of([1, 1, 2])
        reps = [table_of([2, 0, 2]), table_of([1, 3, 4])]
        pools = bucket_differences(original, reps)
        assert sorted(pools[1].tolist()) == [-100.0, 0.0, 100.0, 200.0]
        assert sorted(pools[2].tolist()) == [0.0, 100.0]

    def test_custom_range(self):
        original = table_of([1, 5, 9])
        pools = bucket_differences(original, original, count_range=(5, 6))
        assert set(pools) == {5, 6}
        assert pools[5].tolist() == [0.0]

    def test_range_validation(self):
        original = table_of([1, 2])
        with pytest.raises(ValidationError, match="zero counts"):
            bucket_differences(original, original, count_range=(0, 5))
        with pytest.raises(ValidationError):
            bucket_differences(original, original, count_range=(3, 2))

    def test_schema_mismatch_rejected(self):
        a = table_of([1, 2])
        b = table_of([1, 2, 3])
        with pytest.raises(ValidationError, match="schema"):
            bucket_differences(a, b)

    def test_empty_replicate_list_rejected(self):
        original = table_of([1, 2])
        with pytest.raises(ValidationError):
            bucket_differences(original, [])


class TestPercentageDifferences:
    def test_summary_values(self):
        original = table_of([2, 2, 1])
        synthetic = table_of([1, 2, 3])
        report = percentage_differences(original, synthetic, count_range=(1, 3))
        by_count = {b.count: b for b in report.buckets}

        bucket_two = by_count[2]
        assert bucket_two.n == 2
        assert bucket_two.minimum == -50.0
        assert bucket_two.maximum == 0.0
        assert bucket_two.median == -25.0
        assert bucket_two.q1 == -37.5
        assert bucket_two.q3 == -12.5
        assert bucket_two.mean == -25.0

        bucket_one = by_count[1]
        assert bucket_one.n == 1
        assert bucket_one.median == 200.0

    def test_empty_bucket_reported_as_empty(self):
        original = table_of([1, 1])
        report = percentage_differences(original, original, count_range=(1, 2))
        empty = report.buckets[1]
        assert empty.count == 2
        assert empty.n == 0
        assert empty.minimum is None
        assert empty.mean is None

    def test_report_shape(self):
        original = table_of([1, 2, 3])
        report = percentage_differences(original, original, count_range=(2, 6))
        assert report.low == 2
        assert report.high == 6
        assert tuple(b.count for b in report.buckets) == (2, 3, 4, 5, 6)

    def test_poisson_bucket_mean(self):
        # 5000 cells of count 1 under pseudocount 0.5: expected percentage
        # difference is 100 * alpha = 50, with variance 100^2 * 1.5 per cell.
        original = table_of([1] * 5000)
        synthetic = synth_poisson(original, 0.5, seed=21)
        report = percentage_differences(original, synthetic, count_range=(1, 1))
        bucket = report.buckets[0]
        assert bucket.n == 5000
        se = 100.0 * math.sqrt(1.5 / 5000)
        assert abs(bucket.mean - 50.0) <= 4.0 * se


class TestMeanAbsoluteDeviation:
    def test_handcrafted(self):
        original = table_of([1, 2, 0, 2])
        synthetic = table_of([2, 1, 3, 2])
        assert mean_absolute_deviation(original, synthetic) == 1.25

    def test_identity_is_zero(self):
        original = table_of([4, 5, 6])
        assert mean_absolute_deviation(original, original) == 0.0

    def test_covers_zero_cells(self):
        # An all-zero table with pseudocount 0.5 has E|b| = 0.5.
        original = table_of([0] * 5000)
        synthetic = synth_poisson(original, 0.5, seed=22)
        se = math.sqrt(0.5 / 5000)
        assert abs(mean_absolute_deviation(original, synthetic) - 0.5) <= 4.0 * se

    def test_schema_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            mean_absolute_deviation(table_of([1]), table_of([1, 2]))


class TestRiskCurve:
    def test_passthrough_of_delta(self):
        curve = risk_curve([1.0, 2.0], [0.5, 1.0])
        for point in curve.points:
            assert point.delta == poisson_delta(point.epsilon, point.alpha)

    def test_epsilon_major_order(self):
        curve = risk_curve([1.0, 2.0], [0.5, 1.0])
        assert [(p.epsilon, p.alpha) for p in curve.points] == [
            (1.0, 0.5),
            (1.0, 1.0),
            (2.0, 0.5),
            (2.0, 1.0),
        ]

    def test_validation(self):
        with pytest.raises(ValidationError):
            risk_curve([], [0.5])
        with pytest.raises(ValidationError):
            risk_curve([1.0], [])
        # Out-of-domain grid points surface the accounting error.
        with pytest.raises(ValidationError):
            risk_curve([0.5], [0.5])
