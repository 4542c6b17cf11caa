"""Slow, independent reference implementations used to cross-check the fast paths.

* :func:`brute_force_cells` builds every undirected planar tree with the
  right boundary by repeatedly splitting vertices of the star, tries every
  orientation of the internal edges, and keeps what :func:`validate` accepts.
  It shares no code with the arc-splitting enumerator.
* :func:`dense_smith_form` is textbook dense elimination on a list of lists.
* :func:`determinantal_divisors` gets invariant factors from gcds of minors.
* :func:`realizable_by_cells` decides joint realizability by searching the
  enumerated cells for bivalent vertices with the requested cut classes.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Sequence

from .arity import Arity, check_size
from .cuts_nerve import CutClass
from .planar_trees import PlanarTreeCell, cut_classes, validate

__all__ = [
    "brute_force_cells",
    "dense_smith_form",
    "determinantal_divisors",
    "rational_rank",
    "realizable_by_cells",
]

BRUTE_FORCE_MAX_N = 6


def _star(arity: Arity) -> PlanarTreeCell:
    return PlanarTreeCell.build(arity, [[("L", p) for p in range(arity.n_leaves)]], [])


def _splits(cell: PlanarTreeCell) -> Iterable[PlanarTreeCell]:
    """Every tree obtained by splitting one vertex into two adjacent ones."""
    nv = cell.n_vertices
    new_edge = len(cell.edges)
    for v in range(nv):
        rot = cell.rotations[v]
        m = len(rot)
        # cut the rotation into the cyclic intervals [a, b) and [b, a)
        for a in range(m):
            for size in range(1, m):
                moved = [rot[(a + j) % m] for j in range(size)]
                kept = [rot[(a + size + j) % m] for j in range(m - size)]
                rotations = [list(r) for r in cell.rotations]
                rotations[v] = kept + [("E", new_edge)]
                rotations.append([("E", new_edge)] + moved)
                edges = list(cell.edges)
                # re-home edges whose half-edge moved to the new vertex
                for kind, x in moved:
                    if kind == "E":
                        t, h = edges[x]
                        edges[x] = (nv if t == v else t, nv if h == v else h)
                edges.append((v, nv))
                yield PlanarTreeCell.build(cell.arity, rotations, edges)


def _undirected_key(cell: PlanarTreeCell) -> str:
    return cell.key.replace("<", ">")


def _all_orientations(cell: PlanarTreeCell) -> Iterable[PlanarTreeCell]:
    ne = len(cell.edges)
    for flips in itertools.product((False, True), repeat=ne):
        edges = [(h, t) if f else (t, h) for (t, h), f in zip(cell.edges, flips)]
        yield PlanarTreeCell(cell.arity, cell.rotations, tuple(edges))


def brute_force_cells(arity: Arity, max_n: int = BRUTE_FORCE_MAX_N) -> set[str]:
    """Keys of all valid cells of ``arity``, by exhaustive generation."""
    check_size(arity, max_n)
    vmax = arity.max_vertices
    layer = {_undirected_key(_star(arity)): _star(arity)}
    found: set[str] = set()
    for nv in range(1, vmax + 1):
        for tree in layer.values():
            for cand in _all_orientations(tree):
                if not validate(cand, arity):
                    found.add(cand.key)
        if nv == vmax:
            break
        nxt: dict[str, PlanarTreeCell] = {}
        for tree in layer.values():
            for child in _splits(tree):
                key = _undirected_key(child)
                if key not in nxt:
                    nxt[key] = child
        layer = nxt
    return found


def dense_smith_form(matrix: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Invariant factors by straightforward dense row/column elimination."""
    a = [[int(x) for x in row] for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    out = []
    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    done = False
            for j in range(t + 1, cols):
                q = a[t][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    done = False
            if done:
                # pivot must divide the remaining block
                bad = next(
                    ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                continue
            # move the smallest remaining entry of row/column t to the pivot
            cand = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
            cand += [(abs(a[t][j]), t, j) for j in range(t, cols) if a[t][j]]
            _, i, j = min(cand)
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
        out.append(abs(a[t][t]))
        t += 1
    return tuple(out)


def _det(m: list[list[int]]) -> int:
    """Bareiss fraction-free determinant."""
    a = [row[:] for row in m]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def determinantal_divisors(matrix: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Invariant factors ``d_j = D_j / D_{j-1}`` with ``D_j`` the gcd of j x j minors."""
    a = [[int(x) for x in row] for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    out = []
    prev = 1
    for size in range(1, min(rows, cols) + 1):
        g = 0
        for ri in itertools.combinations(range(rows), size):
            for ci in itertools.combinations(range(cols), size):
                g = math.gcd(g, _det([[a[i][j] for j in ci] for i in ri]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


def rational_rank(matrix: Sequence[Sequence[int]]) -> int:
    a = [[Fraction(int(x)) for x in row] for row in matrix]
    rank = 0
    cols = len(a[0]) if a else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def realizable_by_cells(classes: Iterable[CutClass], cells: Iterable[PlanarTreeCell]) -> bool:
    want = frozenset(classes)
    return any(want <= cut_classes(cell) for cell in cells)
