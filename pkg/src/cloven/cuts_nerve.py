"""Saddle-cut classes, their joint realizability, and the nerve complex.

A cut class is an unordered pair of boundary gaps.  A family of classes is
jointly realizable when representatives can be drawn pairwise disjoint so
that every complementary region of the disk holds an output leaf.  Chords
sharing a gap are allowed; they are drawn parallel, nested by the position
of their other endpoints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .arity import Arity, check_size

__all__ = [
    "CutClass",
    "NerveComplex",
    "class_index",
    "valid_classes",
    "interleave",
    "jointly_realizable",
    "regions",
    "build_nerve",
    "nerve_homology",
]


def class_index(g1: int, g2: int) -> int:
    """Triangular index of the gap pair ``g1 < g2``; used for bitmasks."""
    return g2 * (g2 - 1) // 2 + g1


@dataclass(frozen=True, order=True)
class CutClass:
    g1: int
    g2: int

    def __post_init__(self):
        a, b = sorted((int(self.g1), int(self.g2)))
        if a == b:
            raise ValueError(f"a cut class needs two distinct gaps, got {a}")
        if a < 0:
            raise ValueError("gap indices must be non-negative")
        object.__setattr__(self, "g1", a)
        object.__setattr__(self, "g2", b)

    @classmethod
    def from_arc(cls, first: int, last: int, n: int) -> "CutClass":
        """Class cutting off the cyclic leaf arc ``[first..last]``."""
        return cls((first - 1) % n, last % n)

    @property
    def index(self) -> int:
        return class_index(self.g1, self.g2)

    @property
    def bit(self) -> int:
        return 1 << self.index

    def arcs(self, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Leaves on either side: ``[g1+1..g2]`` and ``[g2+1..g1]`` cyclically."""
        if self.g2 >= n:
            raise ValueError(f"{self} does not fit {n} gaps")
        inner = tuple(range(self.g1 + 1, self.g2 + 1))
        outer = tuple(range(self.g2 + 1, n)) + tuple(range(0, self.g1 + 1))
        return inner, outer

    def is_valid(self, arity: Arity) -> bool:
        if self.g2 >= arity.n_leaves:
            return False
        return all(any(arity.is_output(p) for p in arc) for arc in self.arcs(arity.n_leaves))

    def __str__(self) -> str:
        return f"{{g{self.g1},g{self.g2}}}"


def valid_classes(arity: Arity) -> list[CutClass]:
    n = arity.n_leaves
    out = []
    for g1, g2 in itertools.combinations(range(n), 2):
        c = CutClass(g1, g2)
        if c.is_valid(arity):
            out.append(c)
    return out


def interleave(a: CutClass, b: CutClass) -> bool:
    """True when the chords cross in every drawing (four distinct, alternating ends)."""
    return a.g1 < b.g1 < a.g2 < b.g2 or b.g1 < a.g1 < b.g2 < a.g2


def _check_family(classes: Iterable[CutClass]) -> list[CutClass]:
    fam = list(classes)
    if len(set(fam)) != len(fam):
        raise ValueError(f"duplicate cut classes in {sorted(map(str, fam))}")
    return sorted(fam)


def regions(classes: Iterable[CutClass], arity: Arity) -> list[frozenset[int]]:
    """The ``r+1`` complementary regions of a non-interleaving family.

    Regions are listed by first appearance walking the leaves ``1, 2, ...,
    N-1, 0``; regions holding no leaf come last.
    """
    fam = _check_family(classes)
    n = arity.n_leaves
    for a, b in itertools.combinations(fam, 2):
        if interleave(a, b):
            raise ValueError(f"cut classes {a} and {b} interleave")
    inner_sets = [set(c.arcs(n)[0]) for c in fam]
    groups: dict[tuple[bool, ...], list[int]] = {}
    for leaf in list(range(1, n)) + [0]:
        side = tuple(leaf in s for s in inner_sets)
        groups.setdefault(side, []).append(leaf)
    out = [frozenset(v) for v in groups.values()]
    if len(out) > len(fam) + 1:  # pragma: no cover - impossible for noncrossing chords
        raise AssertionError("noncrossing family produced too many regions")
    out.extend(frozenset() for _ in range(len(fam) + 1 - len(out)))
    return out


def jointly_realizable(classes: Iterable[CutClass], arity: Arity) -> bool:
    fam = _check_family(classes)
    if not all(c.is_valid(arity) for c in fam):
        return False
    if len(fam) > arity.k - 1:
        return False
    for a, b in itertools.combinations(fam, 2):
        if interleave(a, b):
            return False
    return all(any(arity.is_output(p) for p in reg) for reg in regions(fam, arity))


@dataclass
class NerveComplex:
    """Simplicial complex on valid cut classes; simplices are realizable families."""

    arity: Arity
    vertices: list[CutClass]
    simplices: list[list[tuple[int, ...]]] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.simplices) - 1

    def counts(self) -> list[int]:
        return [len(s) for s in self.simplices]

    def masks(self) -> np.ndarray:
        """Class bitmasks of all simplices, sorted ascending."""
        bits = [self.vertices[i].bit for i in range(len(self.vertices))]
        out = [sum(bits[i] for i in simp) for layer in self.simplices for simp in layer]
        return np.array(sorted(out), dtype=np.uint64)

    def facets(self) -> list[tuple[CutClass, ...]]:
        faces = {simp for layer in self.simplices for simp in layer}
        maximal = []
        for simp in sorted(faces, key=lambda s: (-len(s), s)):
            if not any(set(simp) < set(m) for m in maximal):
                maximal.append(simp)
        return [tuple(self.vertices[i] for i in simp) for simp in sorted(maximal)]

    def facet_listing(self) -> str:
        """One facet per line, classes written ``g1-g2``."""
        lines = [" ".join(f"{c.g1}-{c.g2}" for c in facet) for facet in self.facets()]
        return "\n".join(lines) + ("\n" if lines else "")


def build_nerve(arity: Arity, max_n: int | None = None) -> NerveComplex:
    check_size(arity, max_n)
    verts = valid_classes(arity)
    nerve = NerveComplex(arity, verts)
    layer = [(i,) for i in range(len(verts))]
    while layer:
        nerve.simplices.append(layer)
        nxt = []
        for simp in layer:
            for j in range(simp[-1] + 1, len(verts)):
                cand = simp + (j,)
                if jointly_realizable([verts[i] for i in cand], arity):
                    nxt.append(cand)
        layer = nxt
    return nerve


def _nerve_coboundary(nerve: NerveComplex):
    from .homology import GradedComplex

    index: dict[tuple[int, ...], int] = {}
    degree = []
    for d, layer in enumerate(nerve.simplices):
        for simp in layer:
            index[simp] = len(degree)
            degree.append(d)
    rows: list[list[tuple[int, int]]] = [[] for _ in degree]
    for d, layer in enumerate(nerve.simplices[1:], start=1):
        for simp in layer:
            col = index[simp]
            for pos in range(len(simp)):
                face = simp[:pos] + simp[pos + 1 :]
                rows[index[face]].append((col, -1 if pos % 2 else 1))
    return GradedComplex.from_rows(np.array(degree, dtype=np.int64), rows, tag="Nerve", arity=nerve.arity)


def nerve_homology(nerve: NerveComplex):
    """Simplicial homology of the nerve over the integers."""
    from .homology import chain_homology

    return chain_homology(_nerve_coboundary(nerve))


def nerve_cochain_complex(nerve: NerveComplex):
    return _nerve_coboundary(nerve)


def family_from_mask(mask: int, n: int) -> list[CutClass]:
    out = []
    for g1, g2 in itertools.combinations(range(n), 2):
        if mask >> class_index(g1, g2) & 1:
            out.append(CutClass(g1, g2))
    return out


def mask_of(classes: Sequence[CutClass]) -> int:
    m = 0
    for c in classes:
        m |= c.bit
    return m
