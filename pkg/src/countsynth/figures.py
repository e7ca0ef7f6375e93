"""Rendering of report figures to image files.

Plots are built on bare Figure objects with the Agg canvas, so no
interactive backend is touched and rendering works the same on headless
machines. Each function writes one file and returns nothing.
"""

from __future__ import annotations

import os

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .metrics import RiskCurve, UtilityReport


def save_risk_curve_figure(curve: RiskCurve, path: str | os.PathLike) -> None:
    """Line plot of delta against alpha, one line per epsilon."""
    fig = Figure(figsize=(7.0, 4.5))
    FigureCanvasAgg(fig)
    ax = fig.subplots()
    by_epsilon: dict[float, list[tuple[float, float]]] = {}
    for point in curve.points:
        by_epsilon.setdefault(point.epsilon, []).append(
            (point.alpha, point.delta)
        )
    for epsilon, pairs in by_epsilon.items():
        alphas = [a for a, _ in pairs]
        deltas = [d for _, d in pairs]
        ax.plot(alphas, deltas, marker="o", label=f"epsilon = {epsilon:g}")
    ax.set_xlabel("pseudocount alpha")
    ax.set_ylabel("delta")
    ax.set_title("Exact delta for the Poisson pseudocount mechanism")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=150)


def save_utility_figure(report: UtilityReport, path: str | os.PathLike) -> None:
    """Box plot of percentage differences per original-count bucket.

    Boxes come from the report's precomputed summaries (whiskers at the
    observed extremes, no outlier detection). Empty buckets are skipped.
    """
    fig = Figure(figsize=(7.0, 4.5))
    FigureCanvasAgg(fig)
    ax = fig.subplots()
    stats = []
    for bucket in report.buckets:
        if bucket.n == 0:
            continue
        stats.append(
            {
                "label": str(bucket.count),
                "whislo": bucket.minimum,
                "q1": bucket.q1,
                "med": bucket.median,
                "q3": bucket.q3,
                "whishi": bucket.maximum,
                "mean": bucket.mean,
            }
        )
    if stats:
        ax.bxp(stats, showmeans=True, showfliers=False)
    ax.axhline(0.0, color="grey", linewidth=0.8)
    ax.set_xlabel("original cell count")
    ax.set_ylabel("percentage difference")
    ax.set_title("Synthetic vs original counts")
    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=150)
