"""Utility summaries and risk-curve tabulation.

The main utility view buckets cells by their original count c and, within
each bucket, summarizes the signed percentage differences
100 * (b - a) / a between synthetic and original counts. Cells with an
original count of zero have no defined percentage and are excluded; the
mean absolute deviation covers them. Differences may be pooled across
several synthetic replicates of the same original table.

Risk curves tabulate the exact pseudocount delta over a grid of
(alpha, epsilon) pairs. The values are a straight pass-through of the
accounting computation so plots and tables cannot drift from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .accounting import poisson_delta
from .errors import ValidationError
from .tables import ContingencyTable


@dataclass(frozen=True)
class BucketSummary:
    """Five-number summary plus mean for one original-count bucket.

    An empty bucket keeps n = 0 and None statistics; it is reported as
    empty rather than as zeros.
    """

    count: int
    n: int
    minimum: float | None
    q1: float | None
    median: float | None
    q3: float | None
    maximum: float | None
    mean: float | None


@dataclass(frozen=True)
class UtilityReport:
    buckets: tuple[BucketSummary, ...]
    low: int
    high: int


@dataclass(frozen=True)
class CurvePoint:
    alpha: float
    epsilon: float
    delta: float


@dataclass(frozen=True)
class RiskCurve:
    points: tuple[CurvePoint, ...]


def _as_table_list(synthetic) -> list[ContingencyTable]:
    if isinstance(synthetic, ContingencyTable):
        return [synthetic]
    tables = list(synthetic)
    if not tables:
        raise ValidationError("at least one synthetic table is required")
    return tables


def _check_pair(original: ContingencyTable, synthetic: ContingencyTable) -> None:
    if original.schema != synthetic.schema:
        raise ValidationError(
            "original and synthetic tables must share a schema"
        )


def _check_range(count_range: tuple[int, int]) -> tuple[int, int]:
    low, high = int(count_range[0]), int(count_range[1])
    if low < 1:
        raise ValidationError(
            "count range must start at 1 or above; zero counts have no "
            "percentage difference"
        )
    if high < low:
        raise ValidationError("count range upper bound below lower bound")
    return low, high


def bucket_differences(
    original: ContingencyTable,
    synthetic,
    count_range: tuple[int, int] = (1, 10),
) -> dict[int, np.ndarray]:
    """Pooled percentage differences per original count.

    ``synthetic`` is one table or a sequence of replicates; differences
    from all replicates land in the same buckets. Every count in the
    range gets an entry, possibly empty.
    """
    low, high = _check_range(count_range)
    replicates = _as_table_list(synthetic)
    pools: dict[int, list[np.ndarray]] = {c: [] for c in range(low, high + 1)}
    for table in replicates:
        _check_pair(original, table)
        for c in range(low, high + 1):
            mask = original.counts == c
            if mask.any():
                diffs = 100.0 * (table.counts[mask] - c) / c
                pools[c].append(diffs.astype(np.float64))
    return {
        c: (np.concatenate(parts) if parts else np.empty(0, dtype=np.float64))
        for c, parts in pools.items()
    }


def percentage_differences(
    original: ContingencyTable,
    synthetic,
    count_range: tuple[int, int] = (1, 10),
) -> UtilityReport:
    """Per-bucket summaries of signed percentage differences."""
    low, high = _check_range(count_range)
    pools = bucket_differences(original, synthetic, count_range)
    buckets = []
    for c in range(low, high + 1):
        diffs = pools[c]
        if diffs.size == 0:
            buckets.append(
                BucketSummary(c, 0, None, None, None, None, None, None)
            )
            continue
        q1, median, q3 = np.percentile(diffs, [25.0, 50.0, 75.0])
        buckets.append(
            BucketSummary(
                count=c,
                n=int(diffs.size),
                minimum=float(diffs.min()),
                q1=float(q1),
                median=float(median),
                q3=float(q3),
                maximum=float(diffs.max()),
                mean=float(diffs.mean()),
            )
        )
    return UtilityReport(buckets=tuple(buckets), low=low, high=high)


def mean_absolute_deviation(
    original: ContingencyTable, synthetic: ContingencyTable
) -> float:
    """Mean over cells of |b_i - a_i|. Defined for zero cells too."""
    _check_pair(original, synthetic)
    return float(
        np.abs(synthetic.counts - original.counts).mean()
    )


def risk_curve(
    epsilons: Sequence[float], alphas: Sequence[float]
) -> RiskCurve:
    """Exact delta over the (epsilon, alpha) grid, epsilon-major order."""
    epsilons = [float(e) for e in epsilons]
    alphas = [float(a) for a in alphas]
    if not epsilons or not alphas:
        raise ValidationError("epsilon and alpha grids must be non-empty")
    points = tuple(
        CurvePoint(alpha=alpha, epsilon=epsilon, delta=poisson_delta(epsilon, alpha))
        for epsilon in epsilons
        for alpha in alphas
    )
    return RiskCurve(points=points)
