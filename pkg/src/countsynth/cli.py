"""Command line front end.

Subcommands cover the whole pipeline: ``tabulate`` turns microdata into a
contingency table, ``synthesize`` applies a mechanism, ``account``
evaluates budgets in closed form, ``audit`` checks them by simulation,
and ``curve`` and ``utility`` produce report files. The two report
commands also render a figure next to the delimited output unless told
not to.

Options may come from a JSON config file (``--config``); explicit flags
win over config values. Every output file starts with comment lines
recording the tool version, a hash of the resolved configuration, and
the run parameters, so identical inputs and seeds reproduce identical
bytes. Exit codes: 0 on success, 1 when validation rejects flags or file
content, 2 on I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Callable, Sequence

from . import __version__, accounting, figures, mechanisms, metrics, tableio, tables
from .audit import AuditConfig, run_audit
from .errors import ValidationError

THREADS_ENV_VAR = "COUNTSYNTH_THREADS"


class _Parser(argparse.ArgumentParser):
    """argparse parser whose failures become validation errors (exit 1)."""

    def error(self, message: str):
        raise ValidationError(message)


# ---------------------------------------------------------------------------
# Option resolution: flag value if given, else config value, else default.

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        config = json.loads(text)
    except ValueError as exc:
        raise ValidationError(f"config {path}: not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ValidationError(f"config {path}: top level must be an object")
    return config


def _opt(args, config: dict, name: str, default=None):
    attr = name.replace("-", "_")
    if attr == "in":  # 'in' is a keyword, the parser stores it as in_
        attr = "in_"
    value = getattr(args, attr)
    if value is None:
        value = config.get(name, default)
    return value


def _require(args, config: dict, name: str):
    value = _opt(args, config, name)
    if value is None:
        raise ValidationError(f"missing required option --{name}")
    return value


def _to_float(value, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"--{name}: {value!r} is not a number") from None


def _to_int(value, name: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"--{name}: {value!r} is not an integer")
    try:
        return int(str(value), 10)
    except (TypeError, ValueError):
        raise ValidationError(f"--{name}: {value!r} is not an integer") from None


def _parse_values(value, name: str) -> list[float]:
    """A numeric list: JSON list from config, or 'a,b,c', or 'lo:hi:step'."""
    if isinstance(value, (list, tuple)):
        return [_to_float(v, name) for v in value]
    text = str(value)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"--{name}: grids look like lo:hi:step")
        lo, hi, step = (_to_float(p, name) for p in parts)
        if step <= 0 or hi < lo:
            raise ValidationError(f"--{name}: bad grid {text!r}")
        count = int(round((hi - lo) / step)) + 1
        values = [round(lo + i * step, 12) for i in range(count)]
        return [v for v in values if v <= hi + 1e-12]
    return [_to_float(part, name) for part in text.split(",") if part != ""]


def _parse_ints(value, name: str) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [_to_int(v, name) for v in value]
    return [_to_int(part, name) for part in str(value).split(",") if part != ""]


def _parse_count_range(value, name: str) -> tuple[int, int]:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return _to_int(value[0], name), _to_int(value[1], name)
    parts = str(value).split(":")
    if len(parts) != 2:
        raise ValidationError(f"--{name}: ranges look like low:high")
    return _to_int(parts[0], name), _to_int(parts[1], name)


def _config_hash(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _provenance(
    command: str, resolved: dict, hidden: Sequence[str] = ()
) -> list[str]:
    """Comment lines for an output file: version, config hash, options.

    ``hidden`` keys still enter the hash but are not printed; used where
    another header (a table's own provenance) already shows them.
    """
    lines = [
        f"countsynth {__version__}",
        f"command: {command}",
        f"config-hash: {_config_hash(resolved)}",
    ]
    for key in sorted(resolved):
        if key in hidden or resolved[key] is None:
            continue
        lines.append(f"{key}: {_render_option(resolved[key])}")
    return lines


def _render_option(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    if isinstance(value, (list, tuple)):
        return ",".join(_render_option(v) for v in value)
    return str(value)


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _figure_path(out_path: str, explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    return os.path.splitext(out_path)[0] + ".png"


# ---------------------------------------------------------------------------
# Mechanism flags shared by synthesize and audit.

def _add_mechanism_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--mechanism",
        choices=["poisson", "laplace", "gaussian", "multinomial-dirichlet"],
        help="synthesis mechanism",
    )
    parser.add_argument("--alpha", help="pseudocount for the poisson mechanism")
    parser.add_argument("--sigma", help="noise scale for the gaussian mechanism")
    parser.add_argument(
        "--concentration",
        help="dirichlet concentrations: one value broadcast to all cells, "
        "or a comma list matching the cell count",
    )


def _mechanism_spec(args, config, cells: int, epsilon_value=None):
    """Build a mechanism spec from flags; cells sizes broadcast vectors.

    ``epsilon_value`` supplies the Laplace scale parameter where the
    epsilon flag has that meaning (synthesize) or where the audit budget
    doubles as the mechanism parameter (audit).
    """
    name = _require(args, config, "mechanism")
    if name == "poisson":
        alpha = _to_float(_require(args, config, "alpha"), "alpha")
        return mechanisms.PoissonSpec(alpha)
    if name == "laplace":
        if epsilon_value is None:
            raise ValidationError("missing required option --epsilon")
        return mechanisms.LaplaceSpec(float(epsilon_value))
    if name == "gaussian":
        sigma = _to_float(_require(args, config, "sigma"), "sigma")
        return mechanisms.GaussianSpec(sigma)
    values = _parse_values(_require(args, config, "concentration"), "concentration")
    if len(values) == 1 and cells > 1:
        values = values * cells
    return mechanisms.MultinomialDirichletSpec(tuple(values))


def _spec_options(spec) -> dict:
    return {"mechanism": spec.name, **{k: v for k, v in spec.params()}}


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_tabulate(args, config) -> int:
    in_path = _require(args, config, "in")
    out_path = _require(args, config, "out")
    delimiter = str(_opt(args, config, "delimiter", ","))
    schema_path = _opt(args, config, "schema")

    names, rows = tableio.read_microdata(in_path, delimiter)
    if schema_path is not None:
        schema = tableio.read_schema(schema_path)
        if schema.names != names:
            raise ValidationError(
                "microdata header does not match the schema's variables"
            )
    else:
        schema = tables.infer_schema(names, rows)
    table = tables.tabulate(rows, schema)

    resolved = {
        "in": str(in_path),
        "out": str(out_path),
        "delimiter": delimiter,
        "schema": None if schema_path is None else str(schema_path),
    }
    tableio.write_table(
        table, out_path, delimiter=delimiter,
        comments=_provenance("tabulate", resolved),
    )
    print(f"wrote {out_path}: {schema.size} cells, n={table.n}")
    return 0


def cmd_synthesize(args, config) -> int:
    in_path = _require(args, config, "in")
    out_path = _require(args, config, "out")
    delimiter = str(_opt(args, config, "delimiter", ","))
    seed = _to_int(_require(args, config, "seed"), "seed")
    epsilon = _opt(args, config, "epsilon")
    if epsilon is not None:
        epsilon = _to_float(epsilon, "epsilon")

    workers = _opt(args, config, "workers", os.environ.get(THREADS_ENV_VAR))
    workers = 1 if workers is None else _to_int(workers, "workers")
    if workers < 1:
        raise ValidationError("--workers: must be at least 1")

    table = tableio.read_table(in_path, delimiter)
    spec = _mechanism_spec(args, config, table.schema.size, epsilon_value=epsilon)
    synthetic = mechanisms.synthesize(table, spec, seed, workers=workers)

    # The worker count stays out of the header: the output is the same
    # for any scheduling, so it is not provenance.
    resolved = {
        "in": str(in_path),
        "out": str(out_path),
        "delimiter": delimiter,
        "seed": seed,
        **_spec_options(spec),
    }
    # The table's own provenance header already names the mechanism,
    # its parameters, and the seed.
    hidden = ["seed", *_spec_options(spec)]
    tableio.write_table(
        synthetic, out_path, delimiter=delimiter,
        comments=_provenance("synthesize", resolved, hidden=hidden),
    )
    print(f"wrote {out_path}: n={synthetic.n}")
    return 0


def cmd_account(args, config) -> int:
    mechanism = _require(args, config, "mechanism")
    epsilon = _to_float(_require(args, config, "epsilon"), "epsilon")
    out_path = _opt(args, config, "out")
    rows: list[tuple[str, object]] = [("mechanism", mechanism), ("epsilon", epsilon)]
    resolved: dict = {"mechanism": mechanism, "epsilon": epsilon}

    if mechanism == "poisson":
        delta_target = _opt(args, config, "delta-target")
        min_count = _opt(args, config, "min-count")
        if delta_target is not None:
            delta_target = _to_float(delta_target, "delta-target")
            grid = _parse_values(
                _opt(args, config, "alpha-grid", "0.1:1.0:0.1"), "alpha-grid"
            )
            resolved.update({"delta-target": delta_target, "alpha-grid": grid})
            result = accounting.alpha_for_delta(epsilon, delta_target, grid)
            rows.append(("delta-target", delta_target))
            if result is None:
                rows.append(("achieved", "no"))
                rows.append(("note", "no alpha on the grid meets the target"))
            else:
                alpha, delta = result
                rows.extend(
                    [("achieved", "yes"), ("alpha", alpha), ("delta", delta)]
                )
        elif min_count is not None:
            min_count = _to_int(min_count, "min-count")
            resolved["min-count"] = min_count
            delta = accounting.poisson_delta_no_zeros(epsilon, min_count)
            rows.extend(
                [("min-count", min_count), ("alpha", 0.0), ("delta", delta)]
            )
        else:
            alpha = _to_float(_require(args, config, "alpha"), "alpha")
            resolved["alpha"] = alpha
            rows.append(("alpha", alpha))
            if epsilon >= 1.0:
                delta = accounting.poisson_delta(epsilon, alpha)
                rows.extend([("delta", delta), ("mode", "exact")])
            else:
                a_max = _to_int(_opt(args, config, "a-max", 1000), "a-max")
                resolved["a-max"] = a_max
                delta = accounting.poisson_delta_conservative(epsilon, alpha, a_max)
                rows.extend(
                    [
                        ("delta-upper-bound", delta),
                        ("mode", "conservative-union-bound"),
                        ("a-max", a_max),
                    ]
                )
    elif mechanism == "gaussian":
        sigma = _to_float(_require(args, config, "sigma"), "sigma")
        resolved["sigma"] = sigma
        delta = accounting.gaussian_delta(epsilon, sigma)
        rows.extend([("sigma", sigma), ("delta", delta)])
    elif mechanism == "laplace":
        rows.extend(
            [
                ("delta", 0.0),
                ("note", "pre-rounding ratios never leave the budget"),
            ]
        )
    elif mechanism == "multinomial-dirichlet":
        n = _to_int(_require(args, config, "n"), "n")
        resolved["n"] = n
        value = accounting.dirichlet_min_concentration(n, epsilon)
        rows.extend([("n", n), ("min-concentration", value)])
    else:  # pragma: no cover - argparse choices guard this
        raise ValidationError(f"unknown mechanism {mechanism!r}")

    text = tableio.format_rows(
        ("quantity", "value"),
        rows,
        comments=_provenance("account", resolved),
    )
    _emit(text, out_path)
    return 0


def cmd_audit(args, config) -> int:
    epsilon = _to_float(_require(args, config, "epsilon"), "epsilon")
    trials = _to_int(_opt(args, config, "trials", 100_000), "trials")
    seed = _to_int(_require(args, config, "seed"), "seed")
    a_values = _parse_ints(_opt(args, config, "a-values", "1,2,5,10"), "a-values")
    out_path = _opt(args, config, "out")

    spec = _mechanism_spec(args, config, cells=2, epsilon_value=epsilon)
    report = run_audit(
        AuditConfig(
            mechanism=spec,
            epsilon=epsilon,
            trials=trials,
            a_values=tuple(a_values),
            seed=seed,
        )
    )

    resolved = {
        "epsilon": epsilon,
        "trials": trials,
        "seed": seed,
        "a-values": a_values,
        **_spec_options(spec),
    }
    body = []
    for row in report.rows:
        if row.analytic_rate is None:
            within = None
        else:
            within = (
                "yes"
                if abs(row.empirical_rate - row.analytic_rate)
                <= 4.0 * row.std_error
                else "no"
            )
        body.append(
            (
                row.a_value,
                row.empirical_rate,
                row.analytic_rate,
                row.std_error,
                within,
            )
        )
    comments = _provenance("audit", resolved)
    comments.append(f"worst-case-a: {report.worst_case_a}")
    text = tableio.format_rows(
        ("a_value", "empirical_rate", "analytic_rate", "std_error", "within_4se"),
        body,
        comments=comments,
    )
    _emit(text, out_path)
    return 0


def cmd_curve(args, config) -> int:
    epsilons = _parse_values(_require(args, config, "epsilons"), "epsilons")
    alphas = _parse_values(_require(args, config, "alphas"), "alphas")
    out_path = _require(args, config, "out")
    no_figure = bool(_opt(args, config, "no-figure", False))
    figure = _opt(args, config, "figure")

    curve = metrics.risk_curve(epsilons, alphas)
    resolved = {"epsilons": epsilons, "alphas": alphas, "out": str(out_path)}
    text = tableio.format_rows(
        ("alpha", "epsilon", "delta"),
        [(p.alpha, p.epsilon, p.delta) for p in curve.points],
        comments=_provenance("curve", resolved),
    )
    _emit(text, out_path)
    messages = [f"wrote {out_path}"]
    if not no_figure:
        target = _figure_path(str(out_path), figure)
        figures.save_risk_curve_figure(curve, target)
        messages.append(f"wrote {target}")
    print("; ".join(messages))
    return 0


def cmd_utility(args, config) -> int:
    original_path = _require(args, config, "original")
    synthetic_paths = _opt(args, config, "synthetic")
    if not synthetic_paths:
        raise ValidationError("missing required option --synthetic")
    if isinstance(synthetic_paths, str):
        synthetic_paths = [synthetic_paths]
    delimiter = str(_opt(args, config, "delimiter", ","))
    count_range = _parse_count_range(
        _opt(args, config, "count-range", "1:10"), "count-range"
    )
    out_path = _opt(args, config, "out")
    no_figure = bool(_opt(args, config, "no-figure", False))
    figure = _opt(args, config, "figure")

    original = tableio.read_table(original_path, delimiter)
    replicates = [tableio.read_table(p, delimiter) for p in synthetic_paths]
    report = metrics.percentage_differences(original, replicates, count_range)

    resolved = {
        "original": str(original_path),
        "synthetic": [str(p) for p in synthetic_paths],
        "count-range": list(count_range),
        "delimiter": delimiter,
    }
    comments = _provenance("utility", resolved)
    for index, replicate in enumerate(replicates):
        deviation = metrics.mean_absolute_deviation(original, replicate)
        comments.append(
            f"mean-absolute-deviation replicate {index}: {deviation:.12g}"
        )
    body = [
        (
            b.count,
            b.n,
            b.minimum,
            b.q1,
            b.median,
            b.q3,
            b.maximum,
            b.mean,
        )
        for b in report.buckets
    ]
    text = tableio.format_rows(
        ("count", "n", "min", "q1", "median", "q3", "max", "mean"),
        body,
        comments=comments,
    )
    _emit(text, out_path)
    if out_path is not None and not no_figure:
        target = _figure_path(str(out_path), figure)
        figures.save_utility_figure(report, target)
        print(f"wrote {out_path}; wrote {target}")
    elif out_path is not None:
        print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly.

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="countsynth",
        description=(
            "Synthesize privacy-protected contingency tables and account "
            "for the disclosure risk of the synthesis mechanisms."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"countsynth {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file with default option values")

    p = sub.add_parser("tabulate", help="cross-tabulate microdata into a table")
    common(p)
    p.add_argument("--in", dest="in_", metavar="PATH", help="microdata file")
    p.add_argument("--out", help="table file to write")
    p.add_argument("--schema", help="explicit schema JSON (otherwise inferred)")
    p.add_argument("--delimiter", help="field delimiter, default comma")
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("synthesize", help="apply a mechanism to a table")
    common(p)
    p.add_argument("--in", dest="in_", metavar="PATH", help="table file")
    p.add_argument("--out", help="synthetic table file to write")
    p.add_argument("--delimiter", help="field delimiter, default comma")
    _add_mechanism_options(p)
    p.add_argument("--epsilon", help="noise scale parameter for laplace")
    p.add_argument("--seed", help="64-bit unsigned master seed")
    p.add_argument("--workers", help=f"thread count (default ${THREADS_ENV_VAR} or 1)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("account", help="closed-form budget computations")
    common(p)
    p.add_argument(
        "--mechanism",
        choices=["poisson", "laplace", "gaussian", "multinomial-dirichlet"],
    )
    p.add_argument("--epsilon", help="privacy budget epsilon")
    p.add_argument("--alpha", help="poisson pseudocount")
    p.add_argument("--delta-target", help="find the smallest alpha meeting this delta")
    p.add_argument("--alpha-grid", help="grid for --delta-target, list or lo:hi:step")
    p.add_argument("--min-count", help="smallest table count for the alpha=0 form")
    p.add_argument("--a-max", help="count scan bound for epsilon < 1")
    p.add_argument("--sigma", help="gaussian noise scale")
    p.add_argument("--n", help="table total for multinomial-dirichlet")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_account)

    p = sub.add_parser("audit", help="Monte Carlo check of a budget")
    common(p)
    _add_mechanism_options(p)
    p.add_argument(
        "--epsilon",
        help="privacy budget epsilon (also the laplace mechanism parameter)",
    )
    p.add_argument("--a-values", help="comma list of cell counts to audit")
    p.add_argument("--trials", help="Monte Carlo trials per count, default 100000")
    p.add_argument("--seed", help="64-bit unsigned master seed")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("curve", help="tabulate delta over an alpha/epsilon grid")
    common(p)
    p.add_argument("--epsilons", help="epsilon values, list or lo:hi:step")
    p.add_argument("--alphas", help="alpha values, list or lo:hi:step")
    p.add_argument("--out", help="curve file to write")
    p.add_argument("--figure", help="figure path (default: next to --out)")
    p.add_argument(
        "--no-figure", action="store_true", default=None,
        help="skip rendering the figure",
    )
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("utility", help="percentage-difference report")
    common(p)
    p.add_argument("--original", help="original table file")
    p.add_argument(
        "--synthetic", nargs="+", metavar="PATH",
        help="one or more synthetic table files",
    )
    p.add_argument("--count-range", help="bucket range low:high, default 1:10")
    p.add_argument("--delimiter", help="field delimiter, default comma")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--figure", help="figure path (default: next to --out)")
    p.add_argument(
        "--no-figure", action="store_true", default=None,
        help="skip rendering the figure",
    )
    p.set_defaults(func=cmd_utility)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(getattr(args, "config", None))
        func: Callable = args.func
        return func(args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
