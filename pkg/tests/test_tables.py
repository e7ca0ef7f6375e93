"""Schema, table, indexing, and neighbor behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from countsynth import (
    ContingencyTable,
    NeighborPair,
    Schema,
    ValidationError,
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


def two_by_two():
    return schema_from_lists([("x", ["x1", "x2"]), ("y", ["y1", "y2"])])


def two_by_three():
    return schema_from_lists([("a", ["a1", "a2"]), ("b", ["b1", "b2", "b3"])])


class TestSchemaValidation:
    def test_requires_a_variable(self):
        with pytest.raises(ValidationError):
            Schema(())

    def test_requires_two_categories(self):
        with pytest.raises(ValidationError):
            Variable("v", ("only",))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValidationError):
            Variable("v", ("a", "b", "a"))

    def test_rejects_empty_label(self):
        with pytest.raises(ValidationError):
            Variable("v", ("a", ""))

    def test_rejects_duplicate_variable_names(self):
        v = Variable("v", ("a", "b"))
        with pytest.raises(ValidationError):
            Schema((v, v))

    def test_rejects_oversized_cross_classification(self):
        # Ten 10-level variables would be 10^10 cells.
        variables = tuple(
            Variable(f"v{i}", tuple(f"c{j}" for j in range(10)))
            for i in range(10)
        )
        with pytest.raises(ValidationError):
            Schema(variables)

    def test_shape_and_size(self):
        schema = two_by_three()
        assert schema.shape == (2, 3)
        assert schema.size == 6
        assert schema.names == ("a", "b")


class TestCellIndexing:
    def test_first_cell(self):
        schema = two_by_three()
        assert cell_index(schema, ("a1", "b1")) == 0

    def test_last_cell(self):
        schema = two_by_three()
        assert cell_index(schema, ("a2", "b3")) == 5

    def test_last_variable_varies_fastest(self):
        schema = two_by_three()
        assert cell_index(schema, ("a1", "b2")) == 1
        assert cell_index(schema, ("a2", "b1")) == 3

    def test_bijection_exhaustive(self):
        schema = schema_from_lists(
            [
                ("u", ["u1", "u2"]),
                ("v", ["v1", "v2", "v3"]),
                ("w", ["w1", "w2", "w3", "w4"]),
            ]
        )
        seen = set()
        for index in range(schema.size):
            labels = index_tuple(schema, index)
            assert cell_index(schema, labels) == index
            seen.add(labels)
        assert len(seen) == schema.size

    def test_arity_mismatch(self):
        with pytest.raises(ValidationError):
            cell_index(two_by_three(), ("a1",))

    def test_unknown_label(self):
        with pytest.raises(ValidationError, match="variable 'b'"):
            cell_index(two_by_three(), ("a1", "nope"))

    def test_index_out_of_range(self):
        schema = two_by_three()
        for bad in (-1, 6, 2.5, "3"):
            with pytest.raises(ValidationError):
                index_tuple(schema, bad)


class TestContingencyTable:
    def test_counts_are_read_only(self):
        table = ContingencyTable(two_by_two(), np.array([1, 2, 3, 4]))
        with pytest.raises(ValueError):
            table.counts[0] = 9

    def test_total_is_cached(self):
        table = ContingencyTable(two_by_two(), np.array([1, 2, 3, 4]))
        assert table.n == 10

    def test_rejects_negative_counts(self):
        with pytest.raises(ValidationError):
            ContingencyTable(two_by_two(), np.array([1, -1, 0, 0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValidationError):
            ContingencyTable(two_by_two(), np.array([1, 2, 3]))

    def test_rejects_float_counts(self):
        with pytest.raises(ValidationError):
            ContingencyTable(two_by_two(), np.array([1.0, 2.0, 3.0, 4.0]))

    def test_equality(self):
        a = ContingencyTable(two_by_two(), np.array([1, 2, 3, 4]))
        b = ContingencyTable(two_by_two(), np.array([1, 2, 3, 4]))
        c = ContingencyTable(two_by_two(), np.array([1, 2, 3, 5]))
        assert a == b
        assert a != c

    def test_count_at(self):
        table = ContingencyTable(two_by_three(), np.array([0, 1, 2, 3, 4, 5]))
        assert table.count_at(("a2", "b2")) == 4


class TestTabulate:
    def test_empty_rows(self):
        table = tabulate([], two_by_two())
        assert table.n == 0
        assert table.counts.sum() == 0

    def test_direct_count(self):
        schema = schema_from_lists([("x", ["x1", "x2"])])
        table = tabulate([("x1",), ("x1",), ("x2",)], schema)
        assert list(table.counts) == [2, 1]
        assert table.n == 3

    def test_uniform(self):
        schema = two_by_two()
        rows = [index_tuple(schema, i) for i in range(4)]
        table = tabulate(rows, schema)
        assert list(table.counts) == [1, 1, 1, 1]

    def test_unknown_label_names_row_variable_label(self):
        schema = two_by_two()
        with pytest.raises(ValidationError) as excinfo:
            tabulate([("x1", "y1"), ("x1", "oops")], schema)
        message = str(excinfo.value)
        assert "row 2" in message
        assert "'y'" in message
        assert "oops" in message

    def test_arity_mismatch_names_row(self):
        with pytest.raises(ValidationError, match="row 1"):
            tabulate([("x1",)], two_by_two())

    def test_partition_independence(self):
        schema = two_by_three()
        rng = np.random.default_rng(5)
        rows = [index_tuple(schema, int(i)) for i in rng.integers(0, 6, 500)]
        whole = tabulate(rows, schema)
        for split in (1, 123, 499):
            left = tabulate(rows[:split], schema)
            right = tabulate(rows[split:], schema)
            assert list(left.counts + right.counts) == list(whole.counts)


class TestExpand:
    def test_zero_table(self):
        table = ContingencyTable(two_by_two(), np.zeros(4, dtype=int))
        assert expand(table) == []

    def test_order_and_multiplicity(self):
        schema = schema_from_lists([("x", ["x1", "x2"])])
        table = ContingencyTable(schema, np.array([2, 1]))
        assert expand(table) == [("x1",), ("x1",), ("x2",)]

    def test_round_trip(self):
        schema = two_by_three()
        rng = np.random.default_rng(11)
        rows = [index_tuple(schema, int(i)) for i in rng.integers(0, 6, 200)]
        table = tabulate(rows, schema)
        assert tabulate(expand(table), schema) == table


@st.composite
def small_schema_and_rows(draw):
    n_vars = draw(st.integers(1, 3))
    variables = []
    for v in range(n_vars):
        n_cats = draw(st.integers(2, 4))
        variables.append((f"v{v}", [f"c{v}_{c}" for c in range(n_cats)]))
    schema = schema_from_lists(variables)
    indexes = draw(st.lists(st.integers(0, schema.size - 1), max_size=30))
    rows = [index_tuple(schema, i) for i in indexes]
    return schema, rows


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(small_schema_and_rows())
    def test_tabulate_expand_fixed_point(self, schema_and_rows):
        schema, rows = schema_and_rows
        once = tabulate(rows, schema)
        assert tabulate(expand(once), schema) == once

    @settings(max_examples=60, deadline=None)
    @given(small_schema_and_rows(), st.data())
    def test_index_round_trip(self, schema_and_rows, data):
        schema, _ = schema_and_rows
        index = data.draw(st.integers(0, schema.size - 1))
        assert cell_index(schema, index_tuple(schema, index)) == index


class TestNeighbor:
    def test_decrements_one_cell(self):
        schema = schema_from_lists([("x", ["x1", "x2"])])
        table = ContingencyTable(schema, np.array([3, 2]))
        reduced = neighbor(table, 0)
        assert list(reduced.counts) == [2, 2]
        assert reduced.n == table.n - 1

    def test_boundary_count_one(self):
        schema = schema_from_lists([("x", ["x1", "x2"])])
        table = ContingencyTable(schema, np.array([1, 0]))
        assert list(neighbor(table, 0).counts) == [0, 0]

    def test_zero_cell_rejected(self):
        schema = schema_from_lists([("x", ["x1", "x2"])])
        table = ContingencyTable(schema, np.array([1, 0]))
        with pytest.raises(ValidationError, match="no individual"):
            neighbor(table, 1)

    def test_index_out_of_range(self):
        schema = schema_from_lists([("x", ["x1", "x2"])])
        table = ContingencyTable(schema, np.array([1, 0]))
        with pytest.raises(ValidationError):
            neighbor(table, 2)

    def test_pair_constructor(self):
        schema = two_by_two()
        table = ContingencyTable(schema, np.array([2, 1, 0, 4]))
        pair = neighbor_pair(table, 3)
        assert pair.k == 3
        assert pair.full.counts[3] - pair.reduced.counts[3] == 1

    def test_pair_validates_relation(self):
        schema = two_by_two()
        full = ContingencyTable(schema, np.array([2, 1, 0, 4]))
        reduced = ContingencyTable(schema, np.array([1, 1, 0, 4]))
        with pytest.raises(ValidationError):
            NeighborPair(full=full, reduced=reduced, k=3)


class TestInferSchema:
    def test_lexicographic_categories(self):
        schema = infer_schema(
            ("v",), [("zebra",), ("apple",), ("mango",), ("apple",)]
        )
        assert schema.variables[0].categories == ("apple", "mango", "zebra")

    def test_single_category_column_rejected(self):
        with pytest.raises(ValidationError):
            infer_schema(("v",), [("only",), ("only",)])
