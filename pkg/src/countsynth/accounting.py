"""Closed-form privacy accounting for the synthesis mechanisms.

The central object is the likelihood ratio between a mechanism applied to
a table and to its neighbor with one individual removed from cell k. For
a disclosure budget epsilon, the protection event is

    exp(-epsilon) <= P(M(a) = b) / P(M(a') = b) <= exp(epsilon)

and delta is the probability, under the mechanism's own randomness, that
the event fails. All Poisson quantities reduce to the Poisson CDF
evaluated at real thresholds; the convention throughout is floor
semantics, F(x) = P(X <= floor(x)), so integer thresholds are included.

For the Poisson pseudocount mechanism with count a_k and pseudocount
alpha, write rho = (a_k + alpha) / (a_k - 1 + alpha). The ratio at
synthetic count b_k is exp(-1) * rho**b_k, bounded below by exp(-1) and
unbounded above. The two tail probabilities, the worst-case delta at
a_k = 1 for epsilon >= 1, and the zero-pseudocount variant driven by the
smallest original count all follow from that form. For 0 < epsilon < 1
no exact combined delta is provided, only a conservative union bound,
and it is labeled as such.

Everything here is a pure function; ratios are computed in log space so
large synthetic counts cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, pdtr

from .errors import ValidationError


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) pair."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValidationError("epsilon must be positive and finite")
        if not 0.0 <= self.delta <= 1.0:
            raise ValidationError("delta must lie in [0, 1]")


@dataclass(frozen=True)
class RatioBounds:
    """Probabilities that the ratio respects each side of the budget."""

    lower_prob: float
    upper_prob: float

    def __post_init__(self) -> None:
        for name, value in (
            ("lower_prob", self.lower_prob),
            ("upper_prob", self.upper_prob),
        ):
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")


def _check_count(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer")
    value = int(value)
    if value < minimum:
        raise ValidationError(f"{name} must be at least {minimum}")
    return value


def _check_epsilon(value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError("epsilon must be positive and finite")
    return value


def _check_alpha(value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValidationError("alpha must be finite and non-negative")
    return value


def poisson_cdf(x: float, lam: float) -> float:
    """P(X <= floor(x)) for X ~ Poisson(lam).

    The regularized upper incomplete gamma function supplies the sum; the
    floor is applied here so every caller gets the same integer-threshold
    convention.
    """
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        raise ValidationError("lam must be positive and finite")
    x = float(x)
    if math.isnan(x) or x < 0:
        raise ValidationError("x must be non-negative")
    if math.isinf(x):
        return 1.0
    return float(pdtr(math.floor(x), lam))


def _log_rho(a_k: int, alpha: float) -> float:
    """log((a_k + alpha) / (a_k - 1 + alpha)), rejecting a zero denominator."""
    denominator = a_k - 1 + alpha
    if denominator <= 0:
        raise ValidationError(
            "a_k - 1 + alpha must be positive; the count ratio is undefined "
            "when the reduced cell has Poisson mean zero"
        )
    return math.log1p(1.0 / denominator)


def poisson_log_ratio(a_k: int, b_k: int, alpha: float) -> float:
    """log of the Poisson ratio: -1 + b_k * log(rho).

    At b_k = 0 this is exactly -1 for every mechanism configuration,
    including a_k = 1 with alpha = 0. In that last configuration any
    b_k > 0 is impossible under the reduced table, so the ratio is
    infinite and math.inf is returned as the signal.
    """
    a_k = _check_count(a_k, "a_k", minimum=1)
    b_k = _check_count(b_k, "b_k", minimum=0)
    alpha = _check_alpha(alpha)
    if b_k == 0:
        return -1.0
    if a_k - 1 + alpha == 0:
        return math.inf
    return -1.0 + b_k * _log_rho(a_k, alpha)


def poisson_ratio(a_k: int, b_k: int, alpha: float) -> float:
    """Poisson likelihood ratio at synthetic count b_k; may be math.inf."""
    log_ratio = poisson_log_ratio(a_k, b_k, alpha)
    try:
        return math.exp(log_ratio)
    except OverflowError:
        return math.inf


def poisson_lower_tail_prob(a_k: int, alpha: float, epsilon: float) -> float:
    """Probability that the ratio stays above exp(-epsilon).

    Exactly 1 for epsilon >= 1, because the ratio never drops below
    exp(-1). Below that, the failing outputs are the small b_k with
    b_k * log(rho) < 1 - epsilon.
    """
    a_k = _check_count(a_k, "a_k", minimum=1)
    alpha = _check_alpha(alpha)
    epsilon = _check_epsilon(epsilon)
    log_rho = _log_rho(a_k, alpha)
    if epsilon >= 1.0:
        return 1.0
    threshold = (1.0 - epsilon) / log_rho
    return 1.0 - poisson_cdf(threshold, a_k + alpha)


def poisson_upper_tail_prob(a_k: int, alpha: float, epsilon: float) -> float:
    """Probability that the ratio stays below exp(epsilon).

    The passing outputs are b_k <= (1 + epsilon) / log(rho); the CDF's
    floor semantics make the integer boundary inclusive.
    """
    a_k = _check_count(a_k, "a_k", minimum=1)
    alpha = _check_alpha(alpha)
    epsilon = _check_epsilon(epsilon)
    log_rho = _log_rho(a_k, alpha)
    threshold = (1.0 + epsilon) / log_rho
    return poisson_cdf(threshold, a_k + alpha)


def ratio_bounds(a_k: int, alpha: float, epsilon: float) -> RatioBounds:
    """Both tail probabilities for one cell count."""
    return RatioBounds(
        lower_prob=poisson_lower_tail_prob(a_k, alpha, epsilon),
        upper_prob=poisson_upper_tail_prob(a_k, alpha, epsilon),
    )


def poisson_delta(epsilon: float, alpha: float) -> float:
    """Failure probability delta for the pseudocount mechanism, epsilon >= 1.

    The worst case over cell counts is a_k = 1 (checked empirically by
    the audit module's scan, not assumed), so

        delta = 1 - F((1 + epsilon) / log((1 + alpha) / alpha); 1 + alpha)

    delta is not monotone in alpha: the threshold and the Poisson mean
    move together, so risk can rise or fall as alpha grows.
    """
    epsilon = _check_epsilon(epsilon)
    if epsilon < 1.0:
        raise ValidationError(
            "epsilon below 1 has no exact delta here; "
            "use poisson_delta_conservative"
        )
    alpha = _check_alpha(alpha)
    if alpha == 0.0:
        raise ValidationError(
            "alpha must be positive; for zero pseudocount use "
            "poisson_delta_no_zeros with the table's smallest count"
        )
    return 1.0 - poisson_upper_tail_prob(1, alpha, epsilon)


def poisson_delta_no_zeros(epsilon: float, min_count: int) -> float:
    """delta for alpha = 0 on a table whose counts are all at least 1.

    The guarantee is driven by the smallest original count m:

        delta = 1 - F((1 + epsilon) / log((m + 1) / m); m)
    """
    epsilon = _check_epsilon(epsilon)
    if epsilon < 1.0:
        raise ValidationError(
            "epsilon below 1 has no exact delta here; "
            "use poisson_delta_conservative"
        )
    min_count = _check_count(min_count, "min_count", minimum=0)
    if min_count == 0:
        raise ValidationError(
            "min_count 0 means the table has empty cells; "
            "use poisson_delta with alpha > 0"
        )
    threshold = (1.0 + epsilon) / math.log1p(1.0 / min_count)
    return 1.0 - poisson_cdf(threshold, float(min_count))


def poisson_delta_conservative(
    epsilon: float, alpha: float, a_max: int
) -> float:
    """Union-bound delta for 0 < epsilon < 1. Conservative, not exact.

    Below epsilon = 1 both tails can fail and no exact combined value is
    established, so this adds the two failure probabilities per count,
    takes the worst count in 1..a_max, and caps at 1. Often vacuous for
    small epsilon; callers wanting exact per-count pass rates should use
    the audit module's exact rate instead.
    """
    epsilon = _check_epsilon(epsilon)
    if epsilon >= 1.0:
        raise ValidationError(
            "epsilon of 1 or more has an exact delta; use poisson_delta"
        )
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0:
        raise ValidationError("alpha must be positive and finite")
    a_max = _check_count(a_max, "a_max", minimum=1)
    worst = 0.0
    for a_k in range(1, a_max + 1):
        lower = poisson_lower_tail_prob(a_k, alpha, epsilon)
        upper = poisson_upper_tail_prob(a_k, alpha, epsilon)
        worst = max(worst, (1.0 - lower) + (1.0 - upper))
    return min(1.0, worst)


def alpha_for_delta(
    epsilon: float, delta_target: float, alpha_grid
) -> tuple[float, float] | None:
    """Smallest grid alpha whose delta meets the target, with its delta.

    The scan is exhaustive in grid order. delta is not monotone in
    alpha, so bisection would be wrong; an ascending grid is required
    only so "smallest" is well defined. Returns None when no grid point
    qualifies.
    """
    epsilon = _check_epsilon(epsilon)
    delta_target = float(delta_target)
    if not 0.0 <= delta_target <= 1.0:
        raise ValidationError("delta_target must lie in [0, 1]")
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise ValidationError("alpha_grid must be non-empty")
    if any(not math.isfinite(a) or a <= 0 for a in grid):
        raise ValidationError("alpha_grid values must be positive and finite")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("alpha_grid must be strictly ascending")
    for alpha in grid:
        delta = poisson_delta(epsilon, alpha)
        if delta <= delta_target:
            return alpha, delta
    return None


def gaussian_delta(epsilon: float, sigma: float) -> float:
    """delta for additive Normal(0, sigma^2) noise, pre-rounding.

    The log ratio at noise g is (2 g + 1) / (2 sigma^2), normal itself,
    so the pass probability is a difference of normal CDFs:

        1 - delta = Phi(sigma epsilon - 1/(2 sigma))
                    - Phi(-sigma epsilon - 1/(2 sigma))
    """
    epsilon = _check_epsilon(epsilon)
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0:
        raise ValidationError("sigma must be positive and finite")
    centered = 1.0 / (2.0 * sigma)
    pass_prob = float(ndtr(sigma * epsilon - centered) - ndtr(-sigma * epsilon - centered))
    return min(1.0, max(0.0, 1.0 - pass_prob))


def gaussian_log_ratio(a_k: int, value: float, sigma: float) -> float:
    """log density ratio of Normal(a_k, sigma^2) to Normal(a_k - 1, sigma^2)
    at a pre-rounding output ``value``: (2 (value - a_k) + 1) / (2 sigma^2).
    """
    a_k = _check_count(a_k, "a_k", minimum=1)
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0:
        raise ValidationError("sigma must be positive and finite")
    value = float(value)
    return (2.0 * (value - a_k) + 1.0) / (2.0 * sigma * sigma)


def laplace_log_ratio(a_k: int, b_k: float, epsilon: float) -> float:
    """Three-valued log ratio for Laplace noise: epsilon above the original
    count, -epsilon below it, 0 at it."""
    a_k = _check_count(a_k, "a_k", minimum=1)
    epsilon = _check_epsilon(epsilon)
    b_k = float(b_k)
    if b_k > a_k:
        return epsilon
    if b_k < a_k:
        return -epsilon
    return 0.0


def laplace_ratio(a_k: int, b_k: float, epsilon: float) -> float:
    """Laplace likelihood ratio; exactly exp(epsilon), 1, or exp(-epsilon)."""
    return math.exp(laplace_log_ratio(a_k, b_k, epsilon))


def dirichlet_ratio(a_k: int, b_k: int, alpha_k: float) -> float:
    """Ratio for the multinomial-Dirichlet synthesizer at cell k:

        (b_k + a_k - 1 + alpha_k) / (a_k - 1 + alpha_k)

    Always at least 1, with equality exactly at b_k = 0, so only the
    upper budget side can fail for this mechanism.
    """
    a_k = _check_count(a_k, "a_k", minimum=1)
    b_k = _check_count(b_k, "b_k", minimum=0)
    alpha_k = float(alpha_k)
    if not math.isfinite(alpha_k) or alpha_k <= 0:
        raise ValidationError("alpha_k must be positive and finite")
    base = a_k - 1 + alpha_k
    return (b_k + base) / base


def dirichlet_min_concentration(n: int, epsilon: float) -> float:
    """Smallest worst-cell concentration under which the multinomial-
    Dirichlet synthesizer can meet budget epsilon: n / (exp(epsilon) - 1).
    """
    n = _check_count(n, "n", minimum=1)
    epsilon = _check_epsilon(epsilon)
    return n / math.expm1(epsilon)
