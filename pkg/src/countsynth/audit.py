"""Monte Carlo and exact checks that mechanisms meet their claimed budgets.

An audit fixes a neighbor pair through its differing cell: original count
a_k against a_k - 1. The mechanism's output at that one cell determines
the likelihood ratio, so trials sample the cell's synthetic value, score
the ratio against [exp(-epsilon), exp(epsilon)], and report the empirical
pass rate with its binomial standard error. Restricting attention to the
differing cell is exact, not an approximation: for every mechanism here
the ratio across a neighbor pair reduces to the one differing cell, since
all other cells are perturbed identically on both sides.

For the Poisson pseudocount mechanism the exact pass rate is available in
closed form and serves as the oracle the empirical rate is compared
against. The worst-case scan evaluates that exact rate across a range of
counts to locate the least-protected count, instead of assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import accounting
from .errors import ValidationError
from .mechanisms import (
    GaussianSpec,
    LaplaceSpec,
    MechanismSpec,
    MultinomialDirichletSpec,
    PoissonSpec,
    poisson_draws,
)
from .rng import DOMAIN_AUDIT, substream

# Path tags separating audit draws per mechanism, so one seed can feed
# audits of different mechanisms without stream reuse.
_MECHANISM_TAGS = {
    PoissonSpec: 0,
    LaplaceSpec: 1,
    GaussianSpec: 2,
    MultinomialDirichletSpec: 3,
}


@dataclass(frozen=True)
class AuditConfig:
    """One reported audit run: mechanism, budget, counts to test, seed.

    Reported runs need at least 1000 trials so the standard errors mean
    something; exploratory calls can use monte_carlo_pass_rate directly.
    """

    mechanism: MechanismSpec
    epsilon: float
    trials: int
    a_values: tuple[int, ...]
    seed: int

    def __post_init__(self) -> None:
        if type(self.mechanism) not in _MECHANISM_TAGS:
            raise ValidationError("unknown mechanism spec")
        if not math.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValidationError("epsilon must be positive and finite")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1000:
            raise ValidationError("trials must be an integer of at least 1000")
        values = tuple(int(a) for a in self.a_values)
        if not values:
            raise ValidationError("a_values must be non-empty")
        if any(a < 1 for a in values):
            raise ValidationError("a_values must all be at least 1")
        object.__setattr__(self, "a_values", values)


@dataclass(frozen=True)
class AuditRow:
    """Result for one audited count."""

    a_value: int
    empirical_rate: float
    analytic_rate: float | None
    std_error: float


@dataclass(frozen=True)
class AuditReport:
    rows: tuple[AuditRow, ...]
    worst_case_a: int


def exact_pass_rate_poisson(a_k: int, alpha: float, epsilon: float) -> float:
    """Exact probability that the Poisson ratio stays within the budget.

    The event is an interval in the synthetic count: with
    rho = (a_k + alpha) / (a_k - 1 + alpha),

        pass  iff  (1 - epsilon) / log(rho) <= b_k <= (1 + epsilon) / log(rho)

    For epsilon >= 1 the lower constraint is vacuous and this equals the
    upper tail probability alone. Below 1 the lower endpoint rounds up to
    the first admissible integer; the interval can be empty.
    """
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0:
        raise ValidationError("epsilon must be positive and finite")
    upper = accounting.poisson_upper_tail_prob(a_k, alpha, epsilon)
    if epsilon >= 1.0:
        return upper
    log_rho = math.log1p(1.0 / (a_k - 1 + alpha))
    first_passing = math.ceil((1.0 - epsilon) / log_rho)
    if first_passing < 1:
        return upper
    below = accounting.poisson_cdf(first_passing - 1, a_k + alpha)
    return min(1.0, max(0.0, upper - below))


def _poisson_trial_passes(
    spec: PoissonSpec, a_k: int, epsilon: float, trials: int, gen
) -> np.ndarray:
    draws = poisson_draws(gen, a_k + spec.alpha, trials)
    denominator = a_k - 1 + spec.alpha
    if denominator == 0.0:
        # Any positive draw is impossible under the reduced table, so its
        # ratio is infinite; only b_k = 0 (log ratio exactly -1) can pass.
        if epsilon >= 1.0:
            return draws == 0
        return np.zeros(trials, dtype=bool)
    log_rho = math.log1p(1.0 / denominator)
    log_ratio = -1.0 + draws * log_rho
    return (log_ratio >= -epsilon) & (log_ratio <= epsilon)


def monte_carlo_pass_rate(
    mechanism: MechanismSpec,
    a_k: int,
    epsilon: float,
    trials: int,
    seed: int,
) -> tuple[float, float]:
    """Empirical budget pass rate and its standard error.

    Samples the differing cell's synthetic value ``trials`` times from
    the mechanism, evaluates the exact per-output ratio, and counts how
    often it stays within [exp(-epsilon), exp(epsilon)]. Laplace and
    Gaussian draws are audited pre-rounding, matching the densities their
    ratios are derived from.

    The multinomial-Dirichlet audit needs a surrounding table, which a
    single count does not determine; it is fixed here as the two-cell
    table (a_k, a_k), so that mechanism needs exactly two concentrations.
    The cell's marginal under the joint draw is sampled directly through
    its beta-binomial form.
    """
    if type(mechanism) not in _MECHANISM_TAGS:
        raise ValidationError("unknown mechanism spec")
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0:
        raise ValidationError("epsilon must be positive and finite")
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)):
        raise ValidationError("trials must be an integer")
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if isinstance(a_k, bool) or not isinstance(a_k, (int, np.integer)):
        raise ValidationError("a_k must be an integer")
    a_k = int(a_k)
    if a_k < 1:
        raise ValidationError("a_k must be at least 1")
    tag = _MECHANISM_TAGS[type(mechanism)]
    gen = substream(int(seed), DOMAIN_AUDIT, tag, a_k)

    if isinstance(mechanism, PoissonSpec):
        passes = _poisson_trial_passes(mechanism, a_k, epsilon, trials, gen)
    elif isinstance(mechanism, LaplaceSpec):
        values = a_k + gen.laplace(0.0, 1.0 / mechanism.epsilon, trials)
        log_ratios = np.where(
            values > a_k,
            mechanism.epsilon,
            np.where(values < a_k, -mechanism.epsilon, 0.0),
        )
        passes = (log_ratios >= -epsilon) & (log_ratios <= epsilon)
    elif isinstance(mechanism, GaussianSpec):
        sigma = mechanism.sigma
        noise = gen.normal(0.0, sigma, trials)
        log_ratios = (2.0 * noise + 1.0) / (2.0 * sigma * sigma)
        passes = (log_ratios >= -epsilon) & (log_ratios <= epsilon)
    elif isinstance(mechanism, MultinomialDirichletSpec):
        if len(mechanism.concentrations) != 2:
            raise ValidationError(
                "the multinomial-Dirichlet audit uses the two-cell table "
                "(a_k, a_k); supply exactly two concentrations"
            )
        c0, c1 = mechanism.concentrations
        total = 2 * a_k
        probabilities = gen.beta(a_k + c0, a_k + c1, trials)
        draws = gen.binomial(total, probabilities)
        base = a_k - 1 + c0
        log_ratios = np.log1p(draws / base)
        passes = (log_ratios >= -epsilon) & (log_ratios <= epsilon)
    else:  # pragma: no cover - AuditConfig already rejects unknown specs
        raise ValidationError("unknown mechanism spec")

    rate = float(np.count_nonzero(passes)) / trials
    std_error = math.sqrt(rate * (1.0 - rate) / trials)
    return rate, std_error


def analytic_pass_rate(
    mechanism: MechanismSpec, a_k: int, epsilon: float
) -> float | None:
    """Closed-form pass rate for the audited cell, when one exists.

    None for the multinomial-Dirichlet audit (empirical only) and for the
    degenerate Poisson configuration a_k = 1 with alpha = 0, whose exact
    rate is outside the accounting functions' domain.
    """
    if isinstance(mechanism, PoissonSpec):
        if a_k - 1 + mechanism.alpha == 0:
            return None
        return exact_pass_rate_poisson(a_k, mechanism.alpha, epsilon)
    if isinstance(mechanism, LaplaceSpec):
        # The ratio is always in {exp(-eps_m), 1, exp(eps_m)} and the
        # output is continuous, so it passes always or almost never.
        return 1.0 if epsilon >= mechanism.epsilon else 0.0
    if isinstance(mechanism, GaussianSpec):
        return 1.0 - accounting.gaussian_delta(epsilon, mechanism.sigma)
    return None


def run_audit(config: AuditConfig) -> AuditReport:
    """Audit every configured count and locate the worst one.

    Rows are ordered as configured. The worst case is the smallest count
    attaining the lowest pass rate, judged analytically where a closed
    form exists and empirically otherwise.
    """
    rows = []
    for a_value in config.a_values:
        empirical, std_error = monte_carlo_pass_rate(
            config.mechanism, a_value, config.epsilon, config.trials, config.seed
        )
        analytic = analytic_pass_rate(config.mechanism, a_value, config.epsilon)
        rows.append(
            AuditRow(
                a_value=a_value,
                empirical_rate=empirical,
                analytic_rate=analytic,
                std_error=std_error,
            )
        )
    worst = min(
        rows,
        key=lambda row: (
            row.analytic_rate
            if row.analytic_rate is not None
            else row.empirical_rate,
            row.a_value,
        ),
    )
    return AuditReport(rows=tuple(rows), worst_case_a=worst.a_value)


def worst_case_scan(
    alpha: float, epsilon: float, a_max: int
) -> tuple[int, float]:
    """Count in 1..a_max with the lowest exact Poisson pass rate.

    Ties go to the smallest count. Requires alpha > 0: with no
    pseudocount the ratio at a_k = 1 is unbounded and the scan's exact
    rate is undefined there.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0:
        raise ValidationError("alpha must be positive and finite")
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0:
        raise ValidationError("epsilon must be positive and finite")
    if isinstance(a_max, bool) or not isinstance(a_max, (int, np.integer)):
        raise ValidationError("a_max must be an integer")
    if a_max < 1:
        raise ValidationError("a_max must be at least 1")

    best_a, best_rate = 1, math.inf
    for a_k in range(1, int(a_max) + 1):
        rate = exact_pass_rate_poisson(a_k, alpha, epsilon)
        if rate < best_rate:
            best_a, best_rate = a_k, rate
    return best_a, best_rate
