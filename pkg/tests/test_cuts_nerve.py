import itertools

import pytest

from cloven.arity import Arity
from cloven.cuts_nerve import (
    CutClass,
    build_nerve,
    interleave,
    jointly_realizable,
    nerve_homology,
    regions,
    valid_classes,
)
from cloven.oracles import realizable_by_cells
from cloven.planar_trees import enumerate_cells

g = CutClass


def test_valid_class_examples():
    assert valid_classes(Arity.of(0, 0)) == [g(0, 1)]
    assert set(valid_classes(Arity.of(1, 0))) == {g(0, 2), g(1, 2)}
    assert set(valid_classes(Arity.of(1, 1))) == {g(0, 2), g(0, 3), g(1, 2), g(1, 3)}


@pytest.mark.parametrize("i1, i2", [(0, 0), (1, 0), (2, 1), (3, 3), (4, 2)])
def test_k2_class_count(i1, i2):
    assert len(valid_classes(Arity.of(i1, i2))) == (i1 + 1) * (i2 + 1)


def test_joint_realizability_examples():
    a = Arity.of(0, 0, 0)
    assert jointly_realizable([g(0, 1), g(1, 2)], a)
    assert not jointly_realizable([g(0, 1), g(1, 2), g(0, 2)], a)
    for i1, i2 in [(1, 0), (1, 1), (2, 2)]:
        b = Arity.of(i1, i2)
        for x, y in itertools.combinations(valid_classes(b), 2):
            assert not jointly_realizable([x, y], b)


def test_region_examples():
    a = Arity.of(0, 0, 0)
    assert regions([g(0, 1)], a) == [frozenset({1}), frozenset({2, 0})]
    assert regions([g(0, 1), g(1, 2), g(0, 2)], a) == [frozenset({1}), frozenset({2}), frozenset({0}), frozenset()]
    assert regions([g(0, 2)], Arity.of(1, 1)) == [frozenset({1, 2}), frozenset({3, 0})]


def test_interleaving_chords():
    assert interleave(g(0, 2), g(1, 3))
    assert not interleave(g(0, 1), g(2, 3))
    assert not interleave(g(0, 2), g(0, 3))


def test_nerve_examples():
    n = build_nerve(Arity.of(1, 0))
    assert n.counts() == [2] and nerve_homology(n).betti == {0: 2}
    n = build_nerve(Arity.of(0, 0, 0))
    assert n.counts() == [3, 3] and n.dimension == 1
    assert nerve_homology(n).betti == {0: 1, 1: 1}
    n = build_nerve(Arity.of(0, 0))
    assert n.counts() == [1] and nerve_homology(n).betti == {0: 1}
    assert build_nerve(Arity.of(0, 0, 0)).facet_listing().splitlines() == ["0-1 0-2", "0-1 1-2", "0-2 1-2"]


def _all_classes(n):
    return [g(a, b) for a, b in itertools.combinations(range(n), 2)]


@pytest.mark.parametrize(
    "arity",
    [Arity.of(*t) for t in [(1, 0), (1, 1), (2, 1), (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 0, 0), (1, 0, 0, 0),
                            (0, 0, 0, 0, 0)]],
    ids=str,
)
def test_combinatorial_realizability_matches_object_level_cells(arity):
    """Every class subset of size <= k-1, including invalid classes, decided both ways."""
    cells = enumerate_cells(arity)
    classes = _all_classes(arity.n_leaves)
    for r in range(1, arity.k):
        for fam in itertools.combinations(classes, r):
            assert jointly_realizable(fam, arity) == realizable_by_cells(fam, cells), fam


@pytest.mark.parametrize("text", ["(4;0,0,0,0)", "(3;2,0,1)", "(5;0,0,0,0,0)", "(4;1,0,1,0)"])
def test_nerve_dimension_bound(text):
    a = Arity.parse(text)
    assert build_nerve(a).dimension <= a.k - 2
