"""Exact integer (co)homology of graded complexes.

A :class:`GradedComplex` is a free complex with one basis element per cell
and a differential raising degree by one, stored as CSR rows (cell ->
cofaces).  Homology is computed by reducing to a small discrete Morse
complex with the kernels in :mod:`cloven.kernels` and running an exact Smith
normal form on what is left.  The direct route (Smith normal form of every
block of the original complex) is kept for small inputs and as a check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import kernels

__all__ = [
    "GradedComplex",
    "HomologySummary",
    "LesCheck",
    "smith_normal_form",
    "matrix_rank",
    "cohomology",
    "chain_homology",
    "les_consistency",
    "morse_complex",
]


# -- Smith normal form ------------------------------------------------------


def _entries(matrix) -> dict[tuple[int, int], int]:
    if isinstance(matrix, Mapping):
        items = matrix.items()
        return {(int(r), int(c)): int(v) for (r, c), v in items if v}
    if hasattr(matrix, "tocoo"):
        coo = matrix.tocoo()
        out: dict[tuple[int, int], int] = {}
        for r, c, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            if v:
                out[r, c] = out.get((r, c), 0) + int(v)
        return {key: v for key, v in out.items() if v}
    out = {}
    for r, row in enumerate(matrix):
        for c, v in enumerate(row):
            v = int(v)
            if v:
                out[r, c] = v
    return out


class _SparseZ:
    """Integer matrix as row and column dictionaries, for elimination."""

    def __init__(self, entries: dict[tuple[int, int], int]):
        self.rows: dict[int, dict[int, int]] = {}
        self.cols: dict[int, set[int]] = {}
        for (r, c), v in entries.items():
            self.rows.setdefault(r, {})[c] = v
            self.cols.setdefault(c, set()).add(r)

    def _set(self, r: int, c: int, v: int) -> None:
        row = self.rows.setdefault(r, {})
        if v:
            row[c] = v
            self.cols.setdefault(c, set()).add(r)
        else:
            row.pop(c, None)
            col = self.cols.get(c)
            if col is not None:
                col.discard(r)
                if not col:
                    del self.cols[c]
            if not row:
                del self.rows[r]

    def add_row(self, target: int, source: int, factor: int) -> None:
        """row[target] += factor * row[source]."""
        tgt = self.rows.get(target, {})
        for c, v in list(self.rows[source].items()):
            self._set(target, c, tgt.get(c, 0) + factor * v)
            tgt = self.rows.get(target, {})

    def add_col(self, target: int, source: int, factor: int) -> None:
        """col[target] += factor * col[source]."""
        for r in list(self.cols[source]):
            v = self.rows[r][source]
            self._set(r, target, self.rows[r].get(target, 0) + factor * v)

    def drop(self, r: int, c: int) -> None:
        for cc in list(self.rows.get(r, {})):
            self._set(r, cc, 0)
        for rr in list(self.cols.get(c, ())):
            self._set(rr, c, 0)

    def pivot(self) -> tuple[int, int, int]:
        """Entry of least absolute value, fewest row+column nonzeros on ties."""
        best = None
        for r, row in self.rows.items():
            nr = len(row)
            for c, v in row.items():
                key = (abs(v), nr + len(self.cols[c]), r, c)
                if best is None or key < best:
                    best = key
                    if key[0] == 1 and key[1] == 2:
                        return r, c, v
        assert best is not None
        r, c = best[2], best[3]
        return r, c, self.rows[r][c]


def _normalize_diagonal(diag: list[int]) -> tuple[int, ...]:
    """Invariant factors of a diagonal matrix (gcd/lcm exchange)."""
    units = sum(1 for d in diag if d == 1)
    rest = sorted(d for d in diag if d != 1)
    for i in range(len(rest)):
        for j in range(i + 1, len(rest)):
            a, b = rest[i], rest[j]
            g = math.gcd(a, b)
            rest[i], rest[j] = g, a // g * b
    out = [1] * units + sorted(d for d in rest if d == 1) + [d for d in rest if d != 1]
    return tuple(sorted(out))


def smith_normal_form(matrix) -> tuple[int, ...]:
    """Nonzero invariant factors ``d1 | d2 | ...`` of an integer matrix.

    Accepts nested sequences, 2-d numpy arrays, ``{(row, col): value}``
    dictionaries or any object with a ``tocoo()`` method.  Arithmetic is on
    Python integers throughout.
    """
    m = _SparseZ(_entries(matrix))
    diag: list[int] = []
    while m.rows:
        r, c, p = m.pivot()
        bad_row = next((r2 for r2 in m.cols[c] if r2 != r and m.rows[r2][c] % p), None)
        if bad_row is not None:
            m.add_row(bad_row, r, -(m.rows[bad_row][c] // p))
            continue
        bad_col = next((c2 for c2, v in m.rows[r].items() if c2 != c and v % p), None)
        if bad_col is not None:
            m.add_col(bad_col, c, -(m.rows[r][bad_col] // p))
            continue
        for r2 in [x for x in m.cols[c] if x != r]:
            m.add_row(r2, r, -(m.rows[r2][c] // p))
        # column c now holds only the pivot, so clearing row r touches nothing else
        m.drop(r, c)
        diag.append(abs(p))
    return _normalize_diagonal(diag)


def matrix_rank(matrix) -> int:
    return len(smith_normal_form(matrix))


# -- graded complexes -------------------------------------------------------


@dataclass
class GradedComplex:
    """Free complex over the integers with a degree-raising differential.

    ``indptr``/``indices``/``data`` store, for each cell, its cofaces and
    incidence numbers.  ``members`` optionally restricts attention to an
    induced complex on a subset of cells (sorted ids); the differential is
    then the original one with rows and columns outside ``members`` dropped.
    """

    degree: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    tag: str = "Complex"
    arity: Any = None
    members: np.ndarray | None = None
    _transpose: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_rows(
        cls,
        degree: Sequence[int] | np.ndarray,
        rows: Sequence[Iterable[tuple[int, int]]],
        tag: str = "Complex",
        arity: Any = None,
    ) -> "GradedComplex":
        degree = np.asarray(degree, dtype=np.int64)
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        cols: list[int] = []
        vals: list[int] = []
        for i, row in enumerate(rows):
            for c, v in row:
                if degree[c] != degree[i] + 1:
                    raise ValueError(f"entry {i}->{c} does not raise degree by one")
                cols.append(int(c))
                vals.append(int(v))
            indptr[i + 1] = len(cols)
        return cls(degree, indptr, np.array(cols, dtype=np.int64), np.array(vals, dtype=np.int64), tag, arity)

    @classmethod
    def from_blocks(cls, blocks: Mapping[int, Any], sizes: Mapping[int, int], tag: str = "Complex") -> "GradedComplex":
        """Complex from matrices ``blocks[s]`` of shape ``sizes[s+1] x sizes[s]``."""
        degs = sorted(sizes)
        offset = {}
        degree: list[int] = []
        for s in degs:
            offset[s] = len(degree)
            degree.extend([s] * sizes[s])
        rows: list[list[tuple[int, int]]] = [[] for _ in degree]
        for s, mat in blocks.items():
            for (r, c), v in _entries(mat).items():
                rows[offset[s] + c].append((offset[s + 1] + r, v))
        return cls.from_rows(np.array(degree, dtype=np.int64), rows, tag=tag)

    @property
    def n_cells(self) -> int:
        return int(self.degree.shape[0] if self.members is None else self.members.shape[0])

    def member_ids(self) -> np.ndarray:
        if self.members is None:
            return np.arange(self.degree.shape[0], dtype=np.int64)
        return self.members

    def member_mask(self) -> np.ndarray:
        mask = np.zeros(self.degree.shape[0], dtype=bool)
        mask[self.member_ids()] = True
        return mask

    def restrict(self, members: np.ndarray, tag: str | None = None) -> "GradedComplex":
        """Induced complex on ``members`` (ids into the same cell table)."""
        members = np.unique(np.asarray(members, dtype=np.int64))
        return GradedComplex(
            self.degree,
            self.indptr,
            self.indices,
            self.data,
            tag=self.tag if tag is None else tag,
            arity=self.arity,
            members=members,
            _transpose=self._transpose,
        )

    def transpose(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._transpose is None:
            self._transpose = kernels.transpose_csr(
                self.indptr, self.indices, self.data, self.degree.shape[0]
            )
        return self._transpose

    def counts(self) -> dict[int, int]:
        degs = self.degree[self.member_ids()]
        if degs.size == 0:
            return {}
        values, counts = np.unique(degs, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def euler_characteristic(self) -> int:
        return sum((-1) ** s * n for s, n in self.counts().items())

    def unit_entries(self) -> bool:
        return bool(self.data.size == 0 or np.all(np.abs(self.data) == 1))

    def blocks(self) -> dict[int, dict[tuple[int, int], int]]:
        """Per degree ``s``: entries of ``delta_s`` indexed by position within each degree."""
        ids = self.member_ids()
        mask = self.member_mask()
        pos = np.full(self.degree.shape[0], -1, dtype=np.int64)
        for s in self.counts():
            sel = ids[self.degree[ids] == s]
            pos[sel] = np.arange(sel.size)
        out: dict[int, dict[tuple[int, int], int]] = {s: {} for s in self.counts()}
        for c in ids.tolist():
            s = int(self.degree[c])
            for e in range(self.indptr[c], self.indptr[c + 1]):
                t = int(self.indices[e])
                if mask[t]:
                    out[s][int(pos[t]), int(pos[c])] = int(self.data[e])
        return out

    def d_squared_defects(self) -> tuple[int, int, int]:
        return kernels.d_squared_defects(self.indptr, self.indices, self.data, self.member_mask())


# -- homology ---------------------------------------------------------------


@dataclass
class HomologySummary:
    tag: str
    arity: str | None
    betti: dict[int, int]
    torsion: dict[int, tuple[int, ...]]
    cell_counts: dict[int, int]
    kind: str = "cohomology"

    @property
    def euler_from_cells(self) -> int:
        return sum((-1) ** s * n for s, n in self.cell_counts.items())

    @property
    def euler_from_betti(self) -> int:
        return sum((-1) ** s * n for s, n in self.betti.items())

    def rank(self, degree: int) -> int:
        return self.betti.get(degree, 0)

    def torsion_free(self) -> bool:
        return not any(self.torsion.values())

    def nonzero_degrees(self) -> list[int]:
        return [s for s, b in sorted(self.betti.items()) if b] + [
            s for s, t in sorted(self.torsion.items()) if t and not self.betti.get(s)
        ]

    def betti_list(self) -> list[int]:
        if not self.cell_counts:
            return []
        top = max(self.cell_counts)
        return [self.betti.get(s, 0) for s in range(0, top + 1)]

    def to_record(self) -> dict:
        degs = sorted(set(self.cell_counts) | set(self.betti))
        return {
            "kind": self.kind,
            "cells": {str(s): self.cell_counts.get(s, 0) for s in degs},
            "betti": {str(s): self.betti.get(s, 0) for s in degs},
            "torsion": {str(s): list(self.torsion.get(s, ())) for s in degs if self.torsion.get(s)},
            "euler_characteristic": self.euler_from_cells,
        }


@dataclass
class _Reduced:
    counts: dict[int, int]
    sizes: dict[int, int]
    blocks: dict[int, dict[tuple[int, int], int]]


def morse_complex(gc: GradedComplex) -> _Reduced:
    """Discrete Morse reduction of ``gc``; ``blocks[s]`` is ``delta_s`` on critical cells."""
    if not gc.unit_entries():
        raise ValueError("Morse reduction needs unit incidence numbers")
    m = gc.degree.shape[0]
    ids = gc.member_ids()
    order = ids[np.argsort(gc.degree[ids], kind="stable")]
    tptr, tidx, tdata = gc.transpose()
    alive = np.zeros(m, dtype=np.bool_)
    ind = np.zeros(m, dtype=np.int64)
    queued = np.zeros(m, dtype=np.bool_)
    kind = np.zeros(m, dtype=np.int8)
    partner = np.zeros(m, dtype=np.int64)
    stamp = np.zeros(m, dtype=np.int64)
    tsgn = tdata.astype(np.int8) if tdata.dtype != np.int8 else tdata
    aces = kernels.morse_reduce(
        gc.indptr, gc.indices, tptr, tidx, order, gc.degree, alive, ind, queued, kind, partner, stamp
    )
    coef = np.zeros(m, dtype=np.int64)
    inheap = np.zeros(m, dtype=np.bool_)
    rows, cols, vals, ok = kernels.morse_boundary(tptr, tidx, tsgn, aces, kind, partner, stamp, coef, inheap)
    if not ok:
        raise OverflowError("Morse flow coefficients exceeded the int64 guard")
    deg = gc.degree
    pos = {}
    sizes: dict[int, int] = {}
    for a in aces.tolist():
        s = int(deg[a])
        pos[a] = sizes.get(s, 0)
        sizes[s] = pos[a] + 1
    blocks: dict[int, dict[tuple[int, int], int]] = {}
    # rows are faces (degree s), cols the ace whose boundary was computed (s+1)
    for f, c, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
        s = int(deg[f])
        blocks.setdefault(s, {})[pos[c], pos[f]] = v
    return _Reduced(gc.counts(), sizes, blocks)


def _direct(gc: GradedComplex) -> _Reduced:
    counts = gc.counts()
    return _Reduced(counts, dict(counts), gc.blocks())


def _reduce(gc: GradedComplex, method: str) -> _Reduced:
    if method == "direct" or not gc.unit_entries():
        return _direct(gc)
    if method == "morse":
        return morse_complex(gc)
    if method == "auto":
        try:
            return morse_complex(gc)
        except OverflowError:
            return _direct(gc)
    raise ValueError(f"unknown method {method!r}")


def _summaries(gc: GradedComplex, method: str) -> tuple[HomologySummary, HomologySummary]:
    red = _reduce(gc, method)
    factors = {s: smith_normal_form(block) for s, block in red.blocks.items()}
    rank = {s: len(f) for s, f in factors.items()}
    betti = {}
    for s in red.counts:
        betti[s] = red.sizes.get(s, 0) - rank.get(s, 0) - rank.get(s - 1, 0)
    co_t = {s: tuple(d for d in factors.get(s - 1, ()) if d > 1) for s in red.counts}
    ch_t = {s: tuple(d for d in factors.get(s, ()) if d > 1) for s in red.counts}
    arity = None if gc.arity is None else str(gc.arity)
    co = HomologySummary(gc.tag, arity, betti, {s: t for s, t in co_t.items() if t}, red.counts, "cohomology")
    ch = HomologySummary(gc.tag, arity, dict(betti), {s: t for s, t in ch_t.items() if t}, red.counts, "homology")
    return co, ch


def cohomology(gc: GradedComplex, method: str = "auto") -> HomologySummary:
    """``ker delta_s / im delta_{s-1}`` for every degree."""
    return _summaries(gc, method)[0]


def chain_homology(gc: GradedComplex, method: str = "auto") -> HomologySummary:
    """Homology of the transposed complex (boundary lowers degree)."""
    return _summaries(gc, method)[1]


def both_homologies(gc: GradedComplex, method: str = "auto") -> tuple[HomologySummary, HomologySummary]:
    return _summaries(gc, method)


# -- long exact sequence -----------------------------------------------------


@dataclass
class LesCheck:
    ok: bool
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def les_consistency(y: HomologySummary, clov: HomologySummary, full: HomologySummary, k: int) -> LesCheck:
    """Rank identities forced by ``0 -> Y[k-1] -> Full -> Clov -> 0`` with Full acyclic."""
    if full.betti_list()[:1] != [1] or any(full.betti.get(s, 0) for s in full.betti if s != 0):
        return LesCheck(False, f"Full is not acyclic: betti {full.betti_list()}")
    y0 = y.rank(0)
    if k == 2:
        if clov.rank(0) != 1 + y0:
            return LesCheck(False, f"rank H^0(Clov)={clov.rank(0)} but 1 + rank H^0(Y)={1 + y0}")
        extra = [s for s, b in clov.betti.items() if b and s != 0]
    else:
        if clov.rank(0) != 1:
            return LesCheck(False, f"rank H^0(Clov)={clov.rank(0)}, expected 1")
        if clov.rank(k - 2) != y0:
            return LesCheck(False, f"rank H^{k - 2}(Clov)={clov.rank(k - 2)} but rank H^0(Y)={y0}")
        extra = [s for s, b in clov.betti.items() if b and s not in (0, k - 2)]
    if extra:
        return LesCheck(False, f"Clov has cohomology in degree {extra[0]}")
    y_extra = [s for s, b in y.betti.items() if b and s != 0]
    if y_extra:
        return LesCheck(False, f"Y has cohomology in degree {y_extra[0]}")
    return LesCheck(True)
