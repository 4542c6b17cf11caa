"""The syzygy-graded cochain complex of an arity and its pieces.

Basis: one generator per cell, in sorted key order, graded by syzygy degree
``s = N + k - 3 - V``.  The differential sums over contractions of internal
edges, so it raises ``s`` by one.  Contracting never creates a bivalent
vertex and never adds a cut class, which makes

* the cells with no bivalent vertex a subcomplex (``YPart``, regraded by
  ``s - (k - 1)``),
* the cells with at least one bivalent vertex the quotient (``ClovQuotient``),
* the cells realizing a given set of cut classes a quotient as well
  (``SubFamily``), since the set is closed under un-contracting.

Incidence signs: contracting the edge above the vertex with anchored
preorder index ``j`` (the root vertex, holding leaf 0, has index 0) has sign
``(-1)**(j - 1)``.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from . import kernels
from .arity import Arity, check_size
from .cuts_nerve import CutClass, class_index, mask_of
from .homology import GradedComplex
from .planar_trees import PlanarTreeCell, tokens_to_code

__all__ = [
    "CellTable",
    "CellComplex",
    "ChainComplexError",
    "build_cell_table",
    "build_full_complex",
    "sign_of",
    "split_y_and_clov",
    "subfamily_complex",
    "survey_subfamilies",
    "SubfamilySurvey",
    "SIGN_PREORDER",
    "SIGN_RELATIVE",
]

SIGN_PREORDER = kernels.SIGN_PREORDER
SIGN_RELATIVE = kernels.SIGN_RELATIVE

FULL, YPART, CLOV, SUBFAMILY = "Full", "YPart", "ClovQuotient", "SubFamily"


class ChainComplexError(RuntimeError):
    """The differential violates an invariant (a sign-rule or closure defect)."""


def class_bit_table(n: int) -> np.ndarray:
    table = np.full((n, n), -1, dtype=np.int64)
    for g2 in range(n):
        for g1 in range(g2):
            table[g1, g2] = class_index(g1, g2)
    return table


@dataclass
class CellTable:
    """All cells of one arity as packed codes plus per-cell statistics."""

    arity: Arity
    hi: np.ndarray
    lo: np.ndarray
    ntok: np.ndarray
    nverts: np.ndarray
    nbiv: np.ndarray
    cmask: np.ndarray

    def __len__(self) -> int:
        return int(self.hi.shape[0])

    @cached_property
    def syzygy(self) -> np.ndarray:
        a = self.arity
        return (a.n_leaves + a.k - 3 - self.nverts.astype(np.int64)).astype(np.int64)

    def cell(self, i: int) -> PlanarTreeCell:
        return PlanarTreeCell.from_code(self.arity, int(self.hi[i]), int(self.lo[i]))

    def key(self, i: int) -> str:
        return self.cell(i).key

    def index_of(self, cell: PlanarTreeCell) -> int:
        h, l = tokens_to_code(cell.tokens)
        j = kernels.find_code(self.hi, self.lo, np.uint64(h), np.uint64(l))
        if j < 0:
            raise KeyError(f"{cell.key} is not a cell of {self.arity}")
        return int(j)

    def census(self) -> dict[int, int]:
        values, counts = np.unique(self.syzygy, return_counts=True)
        return {int(s): int(c) for s, c in zip(values, counts)}


def build_cell_table(arity: Arity, max_n: int | None = None) -> CellTable:
    from ._enumerate import enumerate_codes

    check_size(arity, max_n)
    hi, lo, ntok = enumerate_codes(arity)
    n = arity.n_leaves
    is_out = np.array([arity.is_output(p) for p in range(n)], dtype=np.bool_)
    ntok = ntok.astype(np.int64)
    nverts, nbiv, cmask = kernels.census(hi, lo, ntok, is_out, class_bit_table(n))
    return CellTable(arity, hi, lo, ntok, nverts.astype(np.int64), nbiv, cmask)


@dataclass
class CellComplex:
    """A complex on a subset of the cells of one arity.

    ``graded`` carries the differential (shared CSR arrays of the full
    complex plus a member list); ``shift`` is subtracted from syzygy degrees
    to get this complex's own grading.
    """

    table: CellTable
    graded: GradedComplex
    tag: str
    shift: int = 0
    classes: tuple[CutClass, ...] = ()

    @property
    def arity(self) -> Arity:
        return self.table.arity

    def member_ids(self) -> np.ndarray:
        return self.graded.member_ids()

    def counts(self) -> dict[int, int]:
        return self.graded.counts()

    def degrees(self) -> list[int]:
        return sorted(self.counts())

    def basis_ids(self, s: int) -> np.ndarray:
        ids = self.member_ids()
        return ids[self.graded.degree[ids] == s]

    def basis(self, s: int) -> list[str]:
        return [self.table.key(int(i)) for i in self.basis_ids(s)]

    def delta(self, s: int) -> dict[tuple[int, int], int]:
        """``delta_s`` as ``{(row in degree s+1, col in degree s): entry}``."""
        return self.graded.blocks().get(s, {})

    def d_squared_zero(self) -> bool:
        return self.graded.d_squared_defects()[0] == 0

    def d_squared_witness(self) -> tuple[str, str] | None:
        n, src, tgt = self.graded.d_squared_defects()
        if n == 0:
            return None
        return self.table.key(int(src)), self.table.key(int(tgt))

    def entries_are_units(self) -> bool:
        ids = self.member_ids()
        mask = self.graded.member_mask()
        g = self.graded
        for c in ids.tolist():
            for e in range(g.indptr[c], g.indptr[c + 1]):
                if mask[g.indices[e]] and abs(int(g.data[e])) != 1:
                    return False
        return True

    def matrix_hash(self, chunk: int = 1 << 16) -> str:
        """SHA-256 of the basis codes and the ``(degree, col, row, entry)`` rows sorted by col then row.

        Streams over ``chunk`` source cells at a time; the digest does not
        depend on ``chunk``.
        """
        ids = self.member_ids()
        mask = self.graded.member_mask()
        g = self.graded
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.table.hi[ids]).tobytes())
        h.update(np.ascontiguousarray(self.table.lo[ids]).tobytes())
        for a in range(0, ids.shape[0], chunk):
            part = ids[a:a + chunk]
            counts = g.indptr[part + 1] - g.indptr[part]
            src = np.repeat(part, counts)
            offs = np.arange(src.shape[0]) - np.repeat(np.cumsum(counts) - counts, counts)
            eidx = np.repeat(g.indptr[part], counts) + offs
            tgt = g.indices[eidx]
            keep = mask[tgt]
            src, tgt, val = src[keep], tgt[keep], g.data[eidx][keep].astype(np.int64)
            order = np.lexsort((tgt, src))
            rows = np.stack([g.degree[src][order], src[order], tgt[order], val[order]], axis=1)
            h.update(np.ascontiguousarray(rows, dtype=np.int64).tobytes())
        return h.hexdigest()

    def write_matrix_market(self, out: IO[str]) -> None:
        """Plain-text listing: ``degree row_key col_key entry`` per nonzero."""
        mask = self.graded.member_mask()
        g = self.graded
        out.write(f"% {self.tag} complex of arity {self.arity}; delta_s maps degree s to s+1\n")
        out.write("% degree row_key col_key entry\n")
        for s in self.degrees():
            for c in self.basis_ids(s).tolist():
                ck = self.table.key(c)
                rows = []
                for e in range(g.indptr[c], g.indptr[c + 1]):
                    t = int(g.indices[e])
                    if mask[t]:
                        rows.append((self.table.key(t), int(g.data[e])))
                for rk, v in sorted(rows):
                    out.write(f"{s} {rk} {ck} {v}\n")


def _full_graded(table: CellTable, rule: int) -> GradedComplex:
    ptr, idx, sgn = kernels.coboundary(table.hi, table.lo, table.ntok, table.nverts, rule)
    if idx.size and idx.min() < 0:
        bad = int(np.flatnonzero(idx < 0)[0])
        src = int(np.searchsorted(ptr, bad, side="right") - 1)
        raise ChainComplexError(f"a contraction of {table.key(src)} is not an enumerated cell")
    return GradedComplex(table.syzygy, ptr, idx, sgn, tag=FULL, arity=table.arity)


def build_full_complex(
    arity: Arity,
    max_n: int | None = None,
    rule: int = SIGN_PREORDER,
    check: bool = True,
    table: CellTable | None = None,
) -> CellComplex:
    table = build_cell_table(arity, max_n) if table is None else table
    full = CellComplex(table, _full_graded(table, rule), FULL)
    if check:
        witness = full.d_squared_witness()
        if witness is not None:
            raise ChainComplexError(f"delta^2 != 0 from {witness[0]} to {witness[1]}")
    return full


def sign_of(cell: PlanarTreeCell, edge: int, rule: int = SIGN_PREORDER) -> int:
    """Incidence sign of contracting internal edge ``edge`` of ``cell``."""
    if not 0 <= edge < len(cell.edges):
        raise ValueError(f"edge {edge} is not an internal edge")
    order = {v: j for j, v in enumerate(cell.preorder)}
    u, w = cell.edges[edge]
    parent, child = (u, w) if order[u] < order[w] else (w, u)
    return int(kernels.contraction_sign(rule, order[child], order[parent]))


def _regraded(full: CellComplex, members: np.ndarray, tag: str, shift: int) -> GradedComplex:
    g = full.graded
    degree = g.degree - shift if shift else g.degree
    return GradedComplex(
        degree, g.indptr, g.indices, g.data, tag=tag, arity=g.arity, members=members, _transpose=g._transpose
    )


def split_y_and_clov(full: CellComplex) -> tuple[CellComplex, CellComplex]:
    if full.tag != FULL:
        raise ValueError("split_y_and_clov expects the Full complex")
    table = full.table
    g = full.graded
    src = np.repeat(np.arange(len(table)), np.diff(g.indptr))
    leaks = np.flatnonzero((table.nbiv[src] == 0) & (table.nbiv[g.indices] > 0))
    if leaks.size:
        e = int(leaks[0])
        raise ChainComplexError(
            f"contracting {table.key(int(src[e]))} created a bivalent vertex in {table.key(int(g.indices[e]))}"
        )
    shift = full.arity.k - 1
    y_ids = np.flatnonzero(table.nbiv == 0)
    c_ids = np.flatnonzero(table.nbiv > 0)
    y = CellComplex(table, _regraded(full, y_ids, YPART, shift), YPART, shift=shift)
    clov = CellComplex(table, _regraded(full, c_ids, CLOV, 0), CLOV)
    return y, clov


def subfamily_members(table: CellTable, classes: Iterable[CutClass]) -> np.ndarray:
    mask = np.uint64(mask_of(list(classes)))
    return np.flatnonzero((table.cmask & mask) == mask)


def subfamily_complex(full: CellComplex, classes: Sequence[CutClass]) -> CellComplex:
    fam = tuple(sorted(classes))
    if len(set(fam)) != len(fam):
        raise ValueError("cut classes must be pairwise distinct")
    n = full.arity.n_leaves
    if any(c.g2 >= n for c in fam):
        ids = np.zeros(0, dtype=np.int64)
    else:
        ids = subfamily_members(full.table, fam)
    label = "SubFamily(" + ",".join(str(c) for c in fam) + ")"
    return CellComplex(full.table, _regraded(full, ids, label, 0), SUBFAMILY, classes=fam)



@dataclass
class SubfamilySurvey:
    """Per-family outcome of reducing every realized class subset at once.

    Families are indexed like ``masks`` (sorted).  ``unlisted`` counts
    realized class subsets missing from ``masks``; ``unrealized`` lists
    the masks no cell realizes.
    """

    masks: np.ndarray
    sizes: np.ndarray
    n_aces: np.ndarray
    ace_degree: np.ndarray
    min_degree: np.ndarray
    d_squared: np.ndarray
    unlisted: int
    unlisted_example: int | None
    unrealized: list[int]
    not_acyclic: list[int]
    seconds: dict[str, float]

    @property
    def n_families(self) -> int:
        return int(self.masks.shape[0])

    def all_acyclic(self) -> bool:
        return not self.not_acyclic and not self.unrealized


def survey_subfamilies(full: CellComplex, masks: np.ndarray) -> SubfamilySurvey:
    """Reduce the subfamily complex of every class set in ``masks``."""
    from .homology import cohomology

    t0 = time.perf_counter()
    table = full.table
    g = full.graded
    masks = np.asarray(masks, dtype=np.uint64)
    # visiting cells by ascending degree leaves every family degree-sorted
    order = np.argsort(g.degree, kind="stable")
    fam, cell = kernels.submask_pairs(table.cmask, masks, order)
    miss = np.flatnonzero(fam < 0)
    unlisted = int(miss.size)
    example = int(table.cmask[cell[miss[0]]]) if unlisted else None
    nf = int(masks.shape[0])
    fptr, fcells = kernels.family_members(fam, cell, nf)
    del fam, cell
    sizes = np.diff(fptr)
    m = len(table)
    tptr, tidx, _ = g.transpose()
    d2 = kernels.family_d_squared(
        g.indptr, g.indices, g.data, fptr, fcells,
        np.zeros(m, dtype=np.bool_), np.zeros(m, dtype=np.int64), np.zeros(m, dtype=np.int64),
    )
    t1 = time.perf_counter()
    alive = np.zeros(m, dtype=np.bool_)
    ind = np.zeros(m, dtype=np.int64)
    queued = np.zeros(m, dtype=np.bool_)
    kind = np.zeros(m, dtype=np.int8)
    partner = np.zeros(m, dtype=np.int64)
    stamp = np.zeros(m, dtype=np.int64)
    n_aces, ace_deg = kernels.family_reductions(
        g.indptr, g.indices, tptr, tidx, g.degree, fptr, fcells, alive, ind, queued, kind, partner, stamp
    )
    min_deg = np.full(nf, -1, dtype=np.int64)
    nonempty = sizes > 0
    min_deg[nonempty] = g.degree[fcells[fptr[:-1][nonempty]].astype(np.int64)]
    bad: list[int] = []
    for f in np.flatnonzero(n_aces > 1).tolist():
        h = cohomology(g.restrict(fcells[fptr[f]:fptr[f + 1]].astype(np.int64)))
        if not (h.torsion_free() and h.nonzero_degrees() == [int(min_deg[f])] and h.rank(int(min_deg[f])) == 1):
            bad.append(f)
    for f in np.flatnonzero((n_aces == 1) & (ace_deg != min_deg)).tolist():
        bad.append(f)
    bad.extend(np.flatnonzero(d2 > 0).tolist())
    return SubfamilySurvey(
        masks=masks,
        sizes=sizes,
        n_aces=n_aces,
        ace_degree=ace_deg,
        min_degree=min_deg,
        d_squared=d2,
        unlisted=unlisted,
        unlisted_example=example,
        unrealized=[int(masks[f]) for f in np.flatnonzero(sizes == 0)],
        not_acyclic=sorted(set(bad)),
        seconds={"d_squared": t1 - t0, "reduce": time.perf_counter() - t1},
    )
