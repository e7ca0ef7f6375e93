"""Synthesis mechanisms that replace original counts with noisy ones.

Four mechanisms are provided. Three perturb each cell independently:

* Poisson pseudocount: b_i ~ Poisson(a_i + alpha). The pseudocount alpha
  keeps zero cells alive and tunes the disclosure risk. alpha = 0 is
  allowed only when every original count is at least one.
* Laplace: b_i = max(0, round(a_i + L)), L ~ Laplace(0, 1/epsilon).
* Gaussian: b_i = max(0, round(a_i + G)), G ~ Normal(0, sigma^2).

Rounding is half away from zero, then negative values clamp to zero. The
fourth mechanism draws the whole table jointly: cell probabilities from a
Dirichlet posterior over the observed proportions, then a multinomial of
the original total, so the synthetic table preserves n exactly.

Every mechanism is deterministic given (table, spec, seed). Independent
cells draw from per-cell streams derived from (seed, cell index), so the
output is identical however the work is scheduled or parallelized.

The Poisson sampler is implemented here rather than taken from a library
generator: inversion by sequential search for small means and a
transformed-rejection method for large ones, each in a scalar form for
the per-cell path and a vectorized form for bulk draws. Both are
validated against the analytic probability mass function in the test
suite. Laplace, Gaussian, gamma, and multinomial draws come straight
from numpy's Generator.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammaln

from .errors import ValidationError
from .rng import cell_stream, table_stream
from .tables import ContingencyTable

# Means at or below this use inversion; above, transformed rejection.
_INVERSION_CUTOFF = 10.0

MAX_SEED = 2**64 - 1


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValidationError("seed must be an integer")
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValidationError("seed must fit in 64 unsigned bits")
    return int(seed)


def _check_positive(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be a positive finite number")
    return value


@dataclass(frozen=True)
class PoissonSpec:
    """Pseudocount mechanism parameters."""

    alpha: float

    name = "poisson"

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or alpha < 0:
            raise ValidationError("alpha must be finite and non-negative")
        object.__setattr__(self, "alpha", alpha)

    def params(self) -> tuple[tuple[str, str], ...]:
        return (("alpha", format(self.alpha, ".12g")),)


@dataclass(frozen=True)
class LaplaceSpec:
    """Laplace noise with scale 1/epsilon."""

    epsilon: float

    name = "laplace"

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", _check_positive(self.epsilon, "epsilon"))

    def params(self) -> tuple[tuple[str, str], ...]:
        return (("epsilon", format(self.epsilon, ".12g")),)


@dataclass(frozen=True)
class GaussianSpec:
    """Normal noise with standard deviation sigma."""

    sigma: float

    name = "gaussian"

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma", _check_positive(self.sigma, "sigma"))

    def params(self) -> tuple[tuple[str, str], ...]:
        return (("sigma", format(self.sigma, ".12g")),)


@dataclass(frozen=True)
class MultinomialDirichletSpec:
    """Per-cell Dirichlet concentrations; length must match the table."""

    concentrations: tuple[float, ...]

    name = "multinomial-dirichlet"

    def __post_init__(self) -> None:
        conc = tuple(float(c) for c in self.concentrations)
        if not conc:
            raise ValidationError("concentrations must be non-empty")
        if any(not math.isfinite(c) or c <= 0 for c in conc):
            raise ValidationError("concentrations must all be positive and finite")
        object.__setattr__(self, "concentrations", conc)

    def params(self) -> tuple[tuple[str, str], ...]:
        values = self.concentrations
        if len(set(values)) == 1:
            text = f"uniform {format(values[0], '.12g')} (K={len(values)})"
        else:
            text = ",".join(format(v, ".12g") for v in values)
        return (("concentrations", text),)


MechanismSpec = Union[
    PoissonSpec, LaplaceSpec, GaussianSpec, MultinomialDirichletSpec
]


@dataclass(frozen=True)
class Provenance:
    """How a synthetic table was produced: the mechanism and the seed."""

    spec: MechanismSpec
    seed: int

    def header_lines(self) -> list[str]:
        lines = [f"mechanism: {self.spec.name}"]
        lines.extend(f"{key}: {value}" for key, value in self.spec.params())
        lines.append(f"seed: {self.seed}")
        return lines


@dataclass(frozen=True, eq=False)
class SyntheticTable(ContingencyTable):
    """A contingency table that records how it was synthesized.

    Equality compares schema and counts only, like the base type.
    """

    provenance: Provenance

    def __post_init__(self) -> None:
        if not isinstance(self.provenance, Provenance):
            raise ValidationError("provenance must be a Provenance value")
        super().__post_init__()


# ---------------------------------------------------------------------------
# Poisson sampling.

def _poisson_inversion_scalar(gen: np.random.Generator, mean: float) -> int:
    # Sequential search through the CDF. The cap is far beyond any mass
    # reachable by a uniform double, so it only bounds the loop.
    u = gen.random()
    p = math.exp(-mean)
    cumulative = p
    k = 0
    cap = int(mean + 40.0 * math.sqrt(mean) + 30.0)
    while u >= cumulative and k < cap:
        k += 1
        p *= mean / k
        cumulative += p
    return k


def _ptrs_constants(mean: float) -> tuple[float, float, float, float]:
    b = 0.931 + 2.53 * math.sqrt(mean)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    return a, b, inv_alpha, v_r


def _poisson_ptrs_scalar(gen: np.random.Generator, mean: float) -> int:
    a, b, inv_alpha, v_r = _ptrs_constants(mean)
    log_mean = math.log(mean)
    while True:
        u = gen.random() - 0.5
        v = gen.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= v_r:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v * inv_alpha / (a / (us * us) + b)) <= (
            k * log_mean - mean - math.lgamma(k + 1.0)
        ):
            return k


def poisson_draw(gen: np.random.Generator, mean: float) -> int:
    """One Poisson variate. Used by the per-cell synthesis path."""
    if mean <= 0.0:
        return 0
    if mean <= _INVERSION_CUTOFF:
        return _poisson_inversion_scalar(gen, mean)
    return _poisson_ptrs_scalar(gen, mean)


def _poisson_inversion_vector(
    gen: np.random.Generator, mean: float, size: int
) -> np.ndarray:
    u = gen.random(size)
    p = np.full(size, math.exp(-mean))
    cumulative = p.copy()
    k = np.zeros(size, dtype=np.int64)
    cap = int(mean + 40.0 * math.sqrt(mean) + 30.0)
    for _ in range(cap):
        behind = u >= cumulative
        if not behind.any():
            break
        k[behind] += 1
        p[behind] *= mean / k[behind]
        cumulative[behind] += p[behind]
    return k


def _poisson_ptrs_vector(
    gen: np.random.Generator, mean: float, size: int
) -> np.ndarray:
    a, b, inv_alpha, v_r = _ptrs_constants(mean)
    log_mean = math.log(mean)
    out = np.empty(size, dtype=np.int64)
    pending = np.arange(size)
    while pending.size:
        u = gen.random(pending.size) - 0.5
        v = gen.random(pending.size)
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a / us + b) * u + mean + 0.43).astype(np.int64)
        accept = (us >= 0.07) & (v <= v_r)
        reject = (k < 0) | ((us < 0.013) & (v > us))
        undecided = ~(accept | reject)
        if undecided.any():
            ku = k[undecided]
            lhs = np.log(v[undecided] * inv_alpha / (a / us[undecided] ** 2 + b))
            rhs = ku * log_mean - mean - gammaln(ku + 1.0)
            accept[undecided] = lhs <= rhs
        out[pending[accept]] = k[accept]
        pending = pending[~accept]
    return out


def poisson_draws(
    gen: np.random.Generator, mean: float, size: int
) -> np.ndarray:
    """Vector of Poisson variates from one stream. Used for bulk draws."""
    if size < 0:
        raise ValidationError("size must be non-negative")
    if mean < 0 or not math.isfinite(mean):
        raise ValidationError("mean must be finite and non-negative")
    if mean == 0.0:
        return np.zeros(size, dtype=np.int64)
    if mean <= _INVERSION_CUTOFF:
        return _poisson_inversion_vector(gen, mean, size)
    return _poisson_ptrs_vector(gen, mean, size)


# ---------------------------------------------------------------------------
# Discretisation shared by the additive-noise mechanisms.

def round_half_away_from_zero(values: np.ndarray) -> np.ndarray:
    """Round to the nearest integer, ties away from zero."""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def _round_clamp_scalar(value: float) -> int:
    rounded = math.floor(abs(value) + 0.5)
    if value < 0:
        rounded = -rounded
    return max(0, rounded)


# ---------------------------------------------------------------------------
# The mechanisms.

def _per_cell_synthesis(table, seed, workers, draw_one):
    """Fill each cell from its own stream; chunking never affects output."""
    size = table.schema.size
    out = np.empty(size, dtype=np.int64)

    def fill(start: int, stop: int) -> None:
        for index in range(start, stop):
            out[index] = draw_one(cell_stream(seed, index), index)

    workers = max(1, int(workers))
    if workers == 1 or size < 2 * workers:
        fill(0, size)
    else:
        step = -(-size // workers)
        bounds = [(lo, min(lo + step, size)) for lo in range(0, size, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [pool.submit(fill, lo, hi) for lo, hi in bounds]:
                future.result()
    return out


def synth_poisson(
    table: ContingencyTable, alpha: float, seed: int, workers: int = 1
) -> SyntheticTable:
    """Poisson pseudocount synthesis: b_i ~ Poisson(a_i + alpha)."""
    spec = PoissonSpec(alpha)
    seed = _check_seed(seed)
    counts = table.counts
    if spec.alpha == 0.0 and counts.size and int(counts.min()) == 0:
        raise ValidationError(
            "alpha 0 requires every original count to be at least 1; "
            "a zero count would be frozen at zero"
        )
    means = counts.astype(np.float64) + spec.alpha

    def draw_one(gen: np.random.Generator, index: int) -> int:
        return poisson_draw(gen, means[index])

    out = _per_cell_synthesis(table, seed, workers, draw_one)
    return SyntheticTable(table.schema, out, Provenance(spec, seed))


def synth_laplace(
    table: ContingencyTable, epsilon: float, seed: int, workers: int = 1
) -> SyntheticTable:
    """Additive Laplace(0, 1/epsilon) noise, rounded and clamped at zero."""
    spec = LaplaceSpec(epsilon)
    seed = _check_seed(seed)
    scale = 1.0 / spec.epsilon
    counts = table.counts

    def draw_one(gen: np.random.Generator, index: int) -> int:
        return _round_clamp_scalar(float(counts[index]) + gen.laplace(0.0, scale))

    out = _per_cell_synthesis(table, seed, workers, draw_one)
    return SyntheticTable(table.schema, out, Provenance(spec, seed))


def synth_gaussian(
    table: ContingencyTable, sigma: float, seed: int, workers: int = 1
) -> SyntheticTable:
    """Additive Normal(0, sigma^2) noise, rounded and clamped at zero."""
    spec = GaussianSpec(sigma)
    seed = _check_seed(seed)
    counts = table.counts

    def draw_one(gen: np.random.Generator, index: int) -> int:
        return _round_clamp_scalar(
            float(counts[index]) + gen.normal(0.0, spec.sigma)
        )

    out = _per_cell_synthesis(table, seed, workers, draw_one)
    return SyntheticTable(table.schema, out, Provenance(spec, seed))


def synth_multinomial_dirichlet(
    table: ContingencyTable,
    concentrations,
    seed: int,
    workers: int = 1,
) -> SyntheticTable:
    """Joint redraw of the table: Dirichlet posterior probabilities, then a
    multinomial of the original total.

    The whole table comes from one stream because the draw is joint; the
    workers argument is accepted for interface symmetry and ignored.
    """
    spec = MultinomialDirichletSpec(tuple(concentrations))
    seed = _check_seed(seed)
    if len(spec.concentrations) != table.schema.size:
        raise ValidationError(
            f"expected {table.schema.size} concentrations, "
            f"got {len(spec.concentrations)}"
        )
    provenance = Provenance(spec, seed)
    if table.n == 0:
        zero = np.zeros(table.schema.size, dtype=np.int64)
        return SyntheticTable(table.schema, zero, provenance)
    gen = table_stream(seed)
    shape = table.counts.astype(np.float64) + np.asarray(spec.concentrations)
    gamma = gen.gamma(shape)
    probabilities = gamma / gamma.sum()
    out = gen.multinomial(table.n, probabilities).astype(np.int64)
    return SyntheticTable(table.schema, out, Provenance(spec, seed))


def synthesize(
    table: ContingencyTable,
    spec: MechanismSpec,
    seed: int,
    workers: int = 1,
) -> SyntheticTable:
    """Apply a mechanism described by its spec."""
    if isinstance(spec, PoissonSpec):
        return synth_poisson(table, spec.alpha, seed, workers)
    if isinstance(spec, LaplaceSpec):
        return synth_laplace(table, spec.epsilon, seed, workers)
    if isinstance(spec, GaussianSpec):
        return synth_gaussian(table, spec.sigma, seed, workers)
    if isinstance(spec, MultinomialDirichletSpec):
        return synth_multinomial_dirichlet(
            table, spec.concentrations, seed, workers
        )
    raise ValidationError(f"unknown mechanism spec: {spec!r}")
