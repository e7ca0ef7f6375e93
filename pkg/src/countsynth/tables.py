"""Categorical schemas, contingency tables, and the single-removal neighbor relation.

A Schema fixes an ordered list of categorical variables, each with an
ordered tuple of category labels. A ContingencyTable is the full
cross-classification of those variables: a flat vector of K non-negative
integer cell counts, where K is the product of the category counts. The
flat layout is row-major with the last variable varying fastest, which
makes the cell index a stable bijection onto label tuples and keeps
serialized files canonical.

Zero cells are always materialized. Synthesis mechanisms may turn an
original zero into a nonzero, so the zero cells have to exist as
addressable positions rather than being implied by absence.

Two tables are neighbors when they agree everywhere except one cell,
where the counts differ by exactly one. ``neighbor`` produces the reduced
table (one individual removed) and ``NeighborPair`` carries both sides
plus the differing cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

# Upper bound on table size held in memory; large enough for the
# multi-million-cell cross-classifications this package targets.
MAX_CELLS = 10_000_000


@dataclass(frozen=True)
class Variable:
    """One categorical variable: a name and its ordered category labels."""

    name: str
    categories: tuple[str, ...]
    _positions: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("variable name must be a non-empty string")
        cats = tuple(self.categories)
        if len(cats) < 2:
            raise ValidationError(
                f"variable '{self.name}' needs at least 2 categories, got {len(cats)}"
            )
        if any(not isinstance(c, str) or c == "" for c in cats):
            raise ValidationError(
                f"variable '{self.name}' has an empty or non-text category label"
            )
        if len(set(cats)) != len(cats):
            raise ValidationError(
                f"variable '{self.name}' has duplicate category labels"
            )
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "_positions", {c: i for i, c in enumerate(cats)})

    def position(self, label: str) -> int:
        """Index of ``label`` within this variable's categories."""
        try:
            return self._positions[label]
        except KeyError:
            raise ValidationError(
                f"unknown label {label!r} for variable '{self.name}'"
            ) from None


@dataclass(frozen=True)
class Schema:
    """Ordered collection of variables defining the cell layout."""

    variables: tuple[Variable, ...]

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        if not variables:
            raise ValidationError("schema needs at least one variable")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ValidationError("schema has duplicate variable names")
        size = math.prod(len(v.categories) for v in variables)
        if size > MAX_CELLS:
            raise ValidationError(
                f"schema describes {size} cells, beyond the supported maximum "
                f"of {MAX_CELLS}"
            )
        object.__setattr__(self, "variables", variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v.categories) for v in self.variables)

    @property
    def size(self) -> int:
        """Number of cells K in the full cross-classification."""
        return math.prod(self.shape)


def schema_from_lists(spec: Iterable[tuple[str, Sequence[str]]]) -> Schema:
    """Build a Schema from (name, categories) pairs. Convenience constructor."""
    return Schema(tuple(Variable(name, tuple(cats)) for name, cats in spec))


def infer_schema(names: Sequence[str], rows: Iterable[Sequence[str]]) -> Schema:
    """Infer a schema from microdata: observed labels per column, sorted.

    Category order is lexicographic, which keeps inference deterministic
    regardless of row order. A column with fewer than two distinct labels
    cannot form a valid variable; supply an explicit schema in that case.
    """
    observed: list[set[str]] = [set() for _ in names]
    width = len(names)
    for row_number, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValidationError(
                f"row {row_number}: expected {width} fields, got {len(row)}"
            )
        for col, label in zip(observed, row):
            col.add(label)
    return Schema(
        tuple(
            Variable(name, tuple(sorted(labels)))
            for name, labels in zip(names, observed)
        )
    )


def cell_index(schema: Schema, labels: Sequence[str]) -> int:
    """Flat cell index of a label tuple under the row-major layout."""
    if len(labels) != len(schema.variables):
        raise ValidationError(
            f"expected {len(schema.variables)} labels, got {len(labels)}"
        )
    index = 0
    for variable, label in zip(schema.variables, labels):
        index = index * len(variable.categories) + variable.position(label)
    return index


def index_tuple(schema: Schema, index: int) -> tuple[str, ...]:
    """Label tuple at a flat cell index. Inverse of ``cell_index``."""
    size = schema.size
    if not isinstance(index, (int, np.integer)) or not 0 <= index < size:
        raise ValidationError(f"cell index {index!r} out of range [0, {size})")
    labels: list[str] = []
    remaining = int(index)
    for variable in reversed(schema.variables):
        remaining, pos = divmod(remaining, len(variable.categories))
        labels.append(variable.categories[pos])
    return tuple(reversed(labels))


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """A schema plus the flat vector of non-negative integer cell counts."""

    schema: Schema
    counts: np.ndarray
    n: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts)
        if arr.dtype.kind not in "iu":
            raise ValidationError("counts must be integers")
        if arr.ndim != 1 or arr.shape[0] != self.schema.size:
            raise ValidationError(
                f"counts must be a flat vector of length {self.schema.size}, "
                f"got shape {arr.shape}"
            )
        if arr.size and int(arr.min()) < 0:
            raise ValidationError("counts must be non-negative")
        arr = arr.astype(np.int64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "n", int(arr.sum()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(
            self.counts, other.counts
        )

    def count_at(self, labels: Sequence[str]) -> int:
        return int(self.counts[cell_index(self.schema, labels)])


def tabulate(rows: Iterable[Sequence[str]], schema: Schema) -> ContingencyTable:
    """Count label tuples into a full contingency table.

    Unknown labels and wrong-arity rows are rejected with the offending
    row number. The result does not depend on row order, so partitioned
    tabulation (sum of partial tables) matches a single pass.
    """
    counts = np.zeros(schema.size, dtype=np.int64)
    variables = schema.variables
    width = len(variables)
    for row_number, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValidationError(
                f"row {row_number}: expected {width} labels, got {len(row)}"
            )
        index = 0
        for variable, label in zip(variables, row):
            try:
                pos = variable._positions[label]
            except KeyError:
                raise ValidationError(
                    f"row {row_number}: unknown label {label!r} for "
                    f"variable '{variable.name}'"
                ) from None
            index = index * len(variable.categories) + pos
        counts[index] += 1
    return ContingencyTable(schema, counts)


def expand(table: ContingencyTable) -> list[tuple[str, ...]]:
    """Synthetic microdata rows for a table, in ascending cell order.

    Each cell's label tuple is repeated once per counted individual, so
    ``tabulate(expand(t), t.schema) == t``.
    """
    rows: list[tuple[str, ...]] = []
    for index in np.flatnonzero(table.counts):
        labels = index_tuple(table.schema, int(index))
        rows.extend([labels] * int(table.counts[index]))
    return rows


def neighbor(table: ContingencyTable, k: int) -> ContingencyTable:
    """The neighboring table with one individual removed from cell ``k``."""
    size = table.schema.size
    if not isinstance(k, (int, np.integer)) or not 0 <= k < size:
        raise ValidationError(f"cell index {k!r} out of range [0, {size})")
    if table.counts[k] < 1:
        raise ValidationError(
            f"cell {k} has count 0: no individual to remove"
        )
    counts = table.counts.copy()
    counts[k] -= 1
    return ContingencyTable(table.schema, counts)


@dataclass(frozen=True, eq=False)
class NeighborPair:
    """A table, its reduced neighbor, and the cell where they differ."""

    full: ContingencyTable
    reduced: ContingencyTable
    k: int

    def __post_init__(self) -> None:
        if self.full.schema != self.reduced.schema:
            raise ValidationError("neighbor pair must share a schema")
        diff = self.full.counts.astype(np.int64) - self.reduced.counts
        nonzero = np.flatnonzero(diff)
        if nonzero.shape != (1,) or int(nonzero[0]) != self.k or diff[self.k] != 1:
            raise ValidationError(
                "tables must differ by exactly one at the stated cell"
            )


def neighbor_pair(table: ContingencyTable, k: int) -> NeighborPair:
    """Build the NeighborPair obtained by removing one individual at ``k``."""
    return NeighborPair(full=table, reduced=neighbor(table, k), k=k)
