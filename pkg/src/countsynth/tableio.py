"""Reading and writing microdata and table files.

Both formats are delimited text (comma by default), UTF-8, with a header
row. Microdata files carry one row per individual. Table files carry one
row per cell in ascending cell order, labels first and the count last,
and may start with ``#`` comment lines holding provenance.

A table file is accompanied by a sidecar schema descriptor, a small JSON
document stored next to it at ``<path>.schema.json``. The sidecar
preserves the exact variable and category order even when some category
never appears or the file is edited. When the sidecar is missing, the
schema is reconstructed from the body, relying on the canonical ascending
cell order.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .tables import ContingencyTable, Schema, Variable, cell_index

SCHEMA_SUFFIX = ".schema.json"


def schema_sidecar_path(table_path: str | os.PathLike) -> Path:
    return Path(os.fspath(table_path) + SCHEMA_SUFFIX)


def schema_to_json(schema: Schema) -> str:
    doc = {
        "variables": [
            {"name": v.name, "categories": list(v.categories)}
            for v in schema.variables
        ]
    }
    return json.dumps(doc, indent=2) + "\n"


def schema_from_json(text: str) -> Schema:
    try:
        doc = json.loads(text)
        variables = tuple(
            Variable(entry["name"], tuple(entry["categories"]))
            for entry in doc["variables"]
        )
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed schema document: {exc}") from None
    return Schema(variables)


def read_schema(path: str | os.PathLike) -> Schema:
    with open(path, "r", encoding="utf-8") as handle:
        return schema_from_json(handle.read())


def write_schema(schema: Schema, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(schema_to_json(schema))


def _read_delimited(path: str | os.PathLike, delimiter: str):
    """All non-empty records of a delimited file, plus leading comments."""
    comments: list[str] = []
    records: list[list[str]] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line_number, line in enumerate(handle, start=1):
            stripped = line.rstrip("\r\n")
            if not stripped:
                continue
            if stripped.startswith("#"):
                comments.append(stripped[1:].strip())
                continue
            for record in csv.reader([stripped], delimiter=delimiter):
                records.append(record)
    return comments, records


def read_microdata(
    path: str | os.PathLike, delimiter: str = ","
) -> tuple[tuple[str, ...], list[tuple[str, ...]]]:
    """Header names and rows of a microdata file.

    Every row must have the header's arity. An empty body is fine; the
    header alone defines the variables.
    """
    _, records = _read_delimited(path, delimiter)
    if not records:
        raise ValidationError(f"{os.fspath(path)}: missing header row")
    header = tuple(records[0])
    if len(set(header)) != len(header) or any(not h for h in header):
        raise ValidationError(
            f"{os.fspath(path)}: header names must be non-empty and unique"
        )
    rows: list[tuple[str, ...]] = []
    for row_number, record in enumerate(records[1:], start=1):
        if len(record) != len(header):
            raise ValidationError(
                f"{os.fspath(path)}: row {row_number}: expected "
                f"{len(header)} fields, got {len(record)}"
            )
        rows.append(tuple(record))
    return header, rows


def format_table(
    table: ContingencyTable,
    delimiter: str = ",",
    comments: Sequence[str] = (),
) -> str:
    """Serialize a table to delimited text. Pure formatting, no I/O.

    Synthetic tables carry provenance; its lines (mechanism, parameters,
    seed) are emitted first, ahead of any caller-supplied comments.
    """
    buffer = io.StringIO()
    provenance = getattr(table, "provenance", None)
    if provenance is not None:
        for comment in provenance.header_lines():
            buffer.write(f"# {comment}\n")
    for comment in comments:
        buffer.write(f"# {comment}\n")
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow(list(table.schema.names) + ["count"])
    labels_per_variable = [v.categories for v in table.schema.variables]
    # Ascending cell order falls out of iterating positions row-major.
    positions = [0] * len(labels_per_variable)
    for index in range(table.schema.size):
        row = [cats[p] for cats, p in zip(labels_per_variable, positions)]
        row.append(str(int(table.counts[index])))
        writer.writerow(row)
        for axis in range(len(positions) - 1, -1, -1):
            positions[axis] += 1
            if positions[axis] < len(labels_per_variable[axis]):
                break
            positions[axis] = 0
    return buffer.getvalue()


def write_table(
    table: ContingencyTable,
    path: str | os.PathLike,
    delimiter: str = ",",
    comments: Sequence[str] = (),
    sidecar: bool = True,
) -> None:
    """Write a table file and (by default) its schema sidecar.

    The body is built in memory first and written in one call, so a
    rejected input never leaves a partial file behind.
    """
    text = format_table(table, delimiter=delimiter, comments=comments)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    if sidecar:
        write_schema(table.schema, schema_sidecar_path(path))


def read_table(
    path: str | os.PathLike, delimiter: str = ","
) -> ContingencyTable:
    """Read a table file written by ``write_table``.

    Uses the schema sidecar when present; otherwise reconstructs the
    schema from the body's first-appearance category order, which equals
    the original order for canonically written files. Every cell must
    appear exactly once, in ascending cell order.
    """
    _, records = _read_delimited(path, delimiter)
    if not records:
        raise ValidationError(f"{os.fspath(path)}: missing header row")
    header = records[0]
    if len(header) < 2 or header[-1] != "count":
        raise ValidationError(
            f"{os.fspath(path)}: table header must end with a 'count' column"
        )
    names = tuple(header[:-1])
    body = records[1:]

    sidecar = schema_sidecar_path(path)
    if os.path.exists(sidecar):
        schema = read_schema(sidecar)
        if schema.names != names:
            raise ValidationError(
                f"{os.fspath(path)}: header names do not match the schema sidecar"
            )
    else:
        observed: list[dict[str, None]] = [{} for _ in names]
        for record in body:
            if len(record) != len(names) + 1:
                continue
            for column, label in zip(observed, record[:-1]):
                column.setdefault(label)
        schema = Schema(
            tuple(
                Variable(name, tuple(column))
                for name, column in zip(names, observed)
            )
        )

    counts = np.full(schema.size, -1, dtype=np.int64)
    for row_number, record in enumerate(body, start=1):
        if len(record) != len(names) + 1:
            raise ValidationError(
                f"{os.fspath(path)}: row {row_number}: expected "
                f"{len(names) + 1} fields, got {len(record)}"
            )
        index = cell_index(schema, record[:-1])
        try:
            value = int(record[-1])
        except ValueError:
            raise ValidationError(
                f"{os.fspath(path)}: row {row_number}: count "
                f"{record[-1]!r} is not an integer"
            ) from None
        if value < 0:
            raise ValidationError(
                f"{os.fspath(path)}: row {row_number}: negative count {value}"
            )
        if counts[index] != -1:
            raise ValidationError(
                f"{os.fspath(path)}: row {row_number}: duplicate cell"
            )
        counts[index] = value
    missing = int((counts == -1).sum())
    if missing:
        raise ValidationError(
            f"{os.fspath(path)}: {missing} of {schema.size} cells missing"
        )
    return ContingencyTable(schema, counts)


def format_rows(
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    delimiter: str = ",",
    comments: Sequence[str] = (),
) -> str:
    """Serialize generic report rows (audit, curve, utility) to text."""
    buffer = io.StringIO()
    for comment in comments:
        buffer.write(f"# {comment}\n")
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(["" if v is None else _format_value(v) for v in row])
    return buffer.getvalue()


def _format_value(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)
