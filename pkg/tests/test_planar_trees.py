import pytest
from hypothesis import given, strategies as st

from cloven.arity import Arity
from cloven.cuts_nerve import CutClass
from cloven.koszul_report import batch_arities, rotation_classes
from cloven.oracles import brute_force_cells
from cloven.planar_trees import (
    PlanarTreeCell,
    bivalent_vertices,
    cells_by_degree,
    code_to_tokens,
    contract,
    contractions,
    cut_class_of,
    cut_classes,
    dimension,
    enumerate_cells,
    is_valid,
    rotate_cell,
    syzygy_degree,
    tokens_to_code,
    validate,
)

A20, A21, A3 = Arity.of(0, 0), Arity.of(1, 0), Arity.of(0, 0, 0)
CHAIN = "(L0<(L1)<(L2))"


def keys(arity):
    return [c.key for c in enumerate_cells(arity)]


def test_star_is_valid_and_has_dimension_zero():
    for a in (A20, A21, Arity.of(2, 1), A3):
        star = PlanarTreeCell.build(a, [[("L", p) for p in range(a.n_leaves)]], [])
        assert validate(star) == []
        assert dimension(star) == 0


def test_regular_point_is_rejected():
    # leaf 0 -> u -> v: u has one incoming and one outgoing internal edge
    cell = PlanarTreeCell.build(A21, [[("L", 0), ("E", 0)], [("E", 0), ("L", 1), ("L", 2)]], [(1, 0)])
    rules = [v.rule for v in validate(cell)]
    assert "regular point, not a cell label" in rules


def test_sink_is_rejected():
    # the inner vertex holds only the input leaf and an incoming edge
    cell = PlanarTreeCell.build(A21, [[("L", 0), ("E", 0), ("L", 2)], [("E", 0), ("L", 1)]], [(0, 1)])
    assert "sink" in [v.rule for v in validate(cell)]


def test_nonplanar_tree_is_rejected():
    cell = PlanarTreeCell.build(A3, [[("L", 0), ("L", 2), ("L", 1)]], [])
    assert "planarity" in [v.rule for v in validate(cell)]


def test_dimension_and_syzygy_examples():
    chain = PlanarTreeCell.from_key(A3, CHAIN)
    assert dimension(chain) == 2 == 2 * A3.k - 4
    assert syzygy_degree(chain) == 0
    cloven = PlanarTreeCell.from_key(A21, "(L0>(L1L2))")
    assert dimension(cloven) == 1
    assert syzygy_degree(PlanarTreeCell.from_key(A20, "(L0L1)")) == 0
    assert syzygy_degree(PlanarTreeCell.from_key(A21, "(L0L1L2)")) == 1


def test_enumeration_examples():
    assert keys(A20) == ["(L0L1)"]
    by = cells_by_degree(A21)
    assert {s: len(v) for s, v in by.items()} == {0: 2, 1: 1}
    assert all(len(bivalent_vertices(c)) == 1 for c in by[0])
    by3 = cells_by_degree(A3)
    assert {s: len(v) for s, v in by3.items()} == {0: 3, 1: 3, 2: 1}


@pytest.mark.parametrize(
    "arity, count",
    [
        (A20, 1),
        (A21, 3),
        (A3, 7),
        (Arity.of(1, 1), 13),
        (Arity.of(0, 0, 0, 0), 81),
        (Arity.of(3, 3), 6873),
        (Arity.of(0, 0, 0, 0, 0), 1151),
        (Arity.of(*[0] * 6), 18225),
        (Arity.of(1, 1, 0, 0), 2781),
        (Arity.of(2, 0, 0, 0), 2395),
    ],
)
def test_cell_counts(arity, count):
    assert len(enumerate_cells(arity)) == count


# every rotation class up to five leaves, and six leaves for k <= 3
BRUTE = [a for a in rotation_classes(batch_arities(6)) if a.n_leaves <= 5 or a.k <= 3]


@pytest.mark.parametrize("arity", BRUTE, ids=str)
def test_enumerator_agrees_with_brute_force(arity):
    assert set(keys(arity)) == brute_force_cells(arity)


@pytest.mark.parametrize("arity", [a for a in BRUTE if a.n_leaves <= 5], ids=str)
def test_enumerated_cells_are_valid_sorted_and_round_trip(arity):
    cells = enumerate_cells(arity)
    ks = [c.key for c in cells]
    assert ks == sorted(ks)
    for c in cells:
        assert is_valid(c)
        assert PlanarTreeCell.from_key(arity, c.key) == c
        h, l = tokens_to_code(c.tokens)
        assert code_to_tokens(h, l, arity.n_leaves) == tuple(c.tokens)


def test_contraction_examples():
    star = PlanarTreeCell.from_key(A21, "(L0L1L2)")
    assert contractions(star) == []
    cloven = PlanarTreeCell.from_key(A21, "(L0>(L1L2))")
    assert [c.key for _, c in contractions(cloven)] == ["(L0L1L2)"]
    chain = PlanarTreeCell.from_key(A3, CHAIN)
    assert sorted(c.key for _, c in contractions(chain)) == ["(L0<(L1)L2)", "(L0L1<(L2))"]


@pytest.mark.parametrize("arity", [A3, Arity.of(1, 1), Arity.of(2, 0, 0), Arity.of(0, 0, 0, 0)], ids=str)
def test_contractions_stay_valid_and_keep_cut_classes(arity):
    for cell in enumerate_cells(arity):
        for e, face in contractions(cell):
            assert is_valid(face)
            assert syzygy_degree(face) == syzygy_degree(cell) + 1
            assert cut_classes(face) <= cut_classes(cell)
            assert len(bivalent_vertices(face)) <= len(bivalent_vertices(cell))
            assert face == contract(cell, e)


def test_cut_class_examples():
    left = PlanarTreeCell.from_key(A21, "(L0>(L1L2))")
    assert cut_classes(left) == {CutClass(0, 2)}
    right = PlanarTreeCell.from_key(A21, "(L0L1<(L2))")
    (v,) = bivalent_vertices(right)
    assert cut_class_of(right, v) == CutClass(1, 2)
    (only,) = enumerate_cells(A20)
    assert cut_classes(only) == {CutClass(0, 1)}


@pytest.mark.parametrize("arity", [A21, A3, Arity.of(2, 1, 0), Arity.of(1, 0, 1, 0)], ids=str)
def test_rotating_cells_permutes_the_cells_of_the_rotated_arity(arity):
    for steps in range(1, arity.k):
        rotated = {rotate_cell(c, steps).key for c in enumerate_cells(arity)}
        assert rotated == set(keys(arity.rotated(steps)))


SMALL = [A21, A3, Arity.of(1, 1), Arity.of(2, 0, 1), Arity.of(0, 0, 0, 0), Arity.of(1, 0, 0, 0)]


@given(st.sampled_from(SMALL), st.data())
def test_key_and_code_round_trip(arity, data):
    cells = enumerate_cells(arity)
    cell = cells[data.draw(st.integers(0, len(cells) - 1))]
    assert PlanarTreeCell.from_key(arity, cell.key).key == cell.key
    assert PlanarTreeCell.from_code(arity, *cell.code) == cell
    assert cell.canonical() == cell
