"""countsynth: synthetic contingency tables with exact risk accounting.

The package synthesizes privacy-protected contingency tables from
categorical microdata using count-noise mechanisms, computes exact
(epsilon, delta) guarantees for the Poisson pseudocount mechanism in
closed form, and verifies guarantees by Monte Carlo audit.
"""

from .accounting import (
    PrivacyBudget,
    RatioBounds,
    alpha_for_delta,
    dirichlet_min_concentration,
    dirichlet_ratio,
    gaussian_delta,
    gaussian_log_ratio,
    laplace_log_ratio,
    laplace_ratio,
    poisson_cdf,
    poisson_delta,
    poisson_delta_conservative,
    poisson_delta_no_zeros,
    poisson_log_ratio,
    poisson_lower_tail_prob,
    poisson_ratio,
    poisson_upper_tail_prob,
    ratio_bounds,
)
from .audit import (
    AuditConfig,
    AuditReport,
    AuditRow,
    analytic_pass_rate,
    exact_pass_rate_poisson,
    monte_carlo_pass_rate,
    run_audit,
    worst_case_scan,
)
from .errors import ValidationError
from .mechanisms import (
    GaussianSpec,
    LaplaceSpec,
    MechanismSpec,
    MultinomialDirichletSpec,
    PoissonSpec,
    Provenance,
    SyntheticTable,
    poisson_draw,
    poisson_draws,
    round_half_away_from_zero,
    synth_gaussian,
    synth_laplace,
    synth_multinomial_dirichlet,
    synth_poisson,
    synthesize,
)
from .rng import audit_stream, cell_stream, substream, table_stream
from .tableio import (
    read_microdata,
    read_schema,
    read_table,
    write_schema,
    write_table,
)
from .metrics import (
    BucketSummary,
    CurvePoint,
    RiskCurve,
    UtilityReport,
    bucket_differences,
    mean_absolute_deviation,
    percentage_differences,
    risk_curve,
)
from .tables import (
    ContingencyTable,
    NeighborPair,
    Schema,
    Variable,
    cell_index,
    expand,
    index_tuple,
    infer_schema,
    neighbor,
    neighbor_pair,
    schema_from_lists,
    tabulate,
)

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "AuditReport",
    "AuditRow",
    "BucketSummary",
    "ContingencyTable",
    "CurvePoint",
    "GaussianSpec",
    "LaplaceSpec",
    "MechanismSpec",
    "MultinomialDirichletSpec",
    "NeighborPair",
    "PoissonSpec",
    "PrivacyBudget",
    "Provenance",
    "RatioBounds",
    "RiskCurve",
    "Schema",
    "SyntheticTable",
    "UtilityReport",
    "ValidationError",
    "Variable",
    "alpha_for_delta",
    "analytic_pass_rate",
    "audit_stream",
    "bucket_differences",
    "cell_index",
    "cell_stream",
    "dirichlet_min_concentration",
    "dirichlet_ratio",
    "exact_pass_rate_poisson",
    "expand",
    "gaussian_delta",
    "gaussian_log_ratio",
    "index_tuple",
    "infer_schema",
    "laplace_log_ratio",
    "laplace_ratio",
    "mean_absolute_deviation",
    "monte_carlo_pass_rate",
    "neighbor",
    "neighbor_pair",
    "percentage_differences",
    "poisson_cdf",
    "poisson_delta",
    "poisson_delta_conservative",
    "poisson_delta_no_zeros",
    "poisson_draw",
    "poisson_draws",
    "poisson_log_ratio",
    "poisson_lower_tail_prob",
    "poisson_ratio",
    "poisson_upper_tail_prob",
    "ratio_bounds",
    "read_microdata",
    "read_schema",
    "read_table",
    "risk_curve",
    "round_half_away_from_zero",
    "run_audit",
    "schema_from_lists",
    "substream",
    "synth_gaussian",
    "synth_laplace",
    "synth_multinomial_dirichlet",
    "synth_poisson",
    "synthesize",
    "table_stream",
    "tabulate",
    "worst_case_scan",
    "write_schema",
    "write_table",
]
