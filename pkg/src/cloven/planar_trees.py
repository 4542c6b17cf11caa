"""Directed planar trees labelling the cells of the regularized moduli space.

A cell is a tree embedded in the disk whose ``N`` boundary leaves sit at the
positions fixed by its :class:`~cloven.arity.Arity`.  Every internal vertex
carries a counterclockwise rotation of its half-edges and every internal edge
a direction.  Output leaves point away from their vertex, input leaves point
into it.

Canonical form
--------------
The anchored depth-first traversal starts at the vertex holding leaf 0 and
walks each rotation starting from the half-edge it entered through.  It is
emitted either as a text key (``CellKey``)::

    KEY  := VERT
    VERT := '(' ITEM* ')'
    ITEM := 'L' digits | ('>' | '<') VERT

or as a token sequence over ``CLOSE < IN < OUT < LEAF`` packed two bits per
token into a left-aligned 128-bit code.  Both orders agree, so sorting codes
sorts keys (for ``N <= 10``, where leaf labels are single digits).
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .arity import Arity, Role, SizeGuardError, boundary_sequence, check_size
from .cuts_nerve import CutClass

__all__ = [
    "Arity",
    "Role",
    "SizeGuardError",
    "PlanarTreeCell",
    "Violation",
    "boundary_sequence",
    "validate",
    "dimension",
    "syzygy_degree",
    "enumerate_cells",
    "cells_by_degree",
    "contractions",
    "bivalent_vertices",
    "cut_class_of",
    "cut_classes",
    "rotate_cell",
    "CLOSE",
    "IN",
    "OUT",
    "LEAF",
    "tokens_to_code",
    "code_to_tokens",
]

CLOSE, IN, OUT, LEAF = 0, 1, 2, 3
MAX_TOKENS = 64

HalfEdge = tuple[str, int]


def tokens_to_code(tokens: Sequence[int]) -> tuple[int, int]:
    if len(tokens) > MAX_TOKENS:
        raise SizeGuardError(f"{len(tokens)} tokens exceed the {MAX_TOKENS}-token code")
    value = 0
    for t in tokens:
        value = (value << 2) | t
    value <<= 2 * (MAX_TOKENS - len(tokens))
    return value >> 64, value & 0xFFFFFFFFFFFFFFFF


def code_to_tokens(hi: int, lo: int, n_leaves: int) -> tuple[int, ...]:
    value = (int(hi) << 64) | int(lo)
    out = []
    leaves = depth = 0
    for p in range(MAX_TOKENS):
        t = (value >> (126 - 2 * p)) & 3
        out.append(t)
        if t == LEAF:
            leaves += 1
        elif t == CLOSE:
            depth -= 1
        else:
            depth += 1
        if leaves == n_leaves and depth == 0:
            break
    return tuple(out)


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule} at {self.where}: {self.message}"


@dataclass(frozen=True, eq=False)
class PlanarTreeCell:
    """A boundary-labelled planar directed tree.

    ``rotations[v]`` lists the half-edges at vertex ``v`` counterclockwise,
    each either ``("L", position)`` or ``("E", edge)``; ``edges[e]`` is the
    ``(tail, head)`` pair of internal edge ``e``.  Equality and hashing go
    through the canonical key, so differently numbered copies of the same
    tree compare equal.
    """

    arity: Arity
    rotations: tuple[tuple[HalfEdge, ...], ...]
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, arity: Arity, rotations: Iterable[Iterable[HalfEdge]], edges: Iterable[tuple[int, int]]):
        rots = tuple(tuple((str(kind), int(x)) for kind, x in rot) for rot in rotations)
        return cls(arity, rots, tuple((int(u), int(v)) for u, v in edges))

    @classmethod
    def from_tokens(cls, arity: Arity, tokens: Sequence[int]) -> "PlanarTreeCell":
        n = arity.n_leaves
        rotations: list[list[HalfEdge]] = [[]]
        edges: list[tuple[int, int]] = []
        stack: list[int] = []
        cur = leaf = 0
        for t in tokens:
            if t == LEAF:
                rotations[cur].append(("L", leaf))
                leaf += 1
            elif t in (OUT, IN):
                w = len(rotations)
                e = len(edges)
                edges.append((cur, w) if t == OUT else (w, cur))
                rotations[cur].append(("E", e))
                rotations.append([("E", e)])
                stack.append(cur)
                cur = w
            else:
                if not stack:
                    raise ValueError("unbalanced token sequence")
                cur = stack.pop()
            if leaf == n and not stack:
                break
        if leaf != n or stack:
            raise ValueError(f"token sequence does not describe {n} leaves")
        return cls(arity, tuple(tuple(r) for r in rotations), tuple(edges))

    @classmethod
    def from_code(cls, arity: Arity, hi: int, lo: int) -> "PlanarTreeCell":
        return cls.from_tokens(arity, code_to_tokens(hi, lo, arity.n_leaves))

    @classmethod
    def from_key(cls, arity: Arity, key: str) -> "PlanarTreeCell":
        tokens = []
        leaves = []
        pos = 0
        if not key.startswith("(") or not key.endswith(")"):
            raise ValueError(f"malformed cell key {key!r}")
        body = key[1:-1]
        for m in re.finditer(r"L(\d+)|([<>])\(|\)|(.)", body):
            if m.group(3) is not None:
                raise ValueError(f"unexpected {m.group(3)!r} in cell key {key!r}")
            if m.group(1) is not None:
                tokens.append(LEAF)
                leaves.append(int(m.group(1)))
            elif m.group(2) is not None:
                tokens.append(OUT if m.group(2) == ">" else IN)
            else:
                tokens.append(CLOSE)
            pos = m.end()
        if pos != len(body):
            raise ValueError(f"malformed cell key {key!r}")
        if leaves != list(range(len(leaves))):
            # keys of non-canonical candidates carry explicit labels
            cell = cls.from_tokens(Arity(arity.k, arity.inputs), tokens)
            relabel = dict(enumerate(leaves))
            rots = tuple(
                tuple(("L", relabel[x]) if kind == "L" else (kind, x) for kind, x in rot)
                for rot in cell.rotations
            )
            return cls(arity, rots, cell.edges)
        return cls.from_tokens(arity, tokens)

    # -- structure -------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.rotations)

    def valence(self, v: int) -> int:
        return len(self.rotations[v])

    def out_degree(self, v: int) -> int:
        out = 0
        for kind, x in self.rotations[v]:
            if kind == "L":
                out += self.arity.is_output(x)
            else:
                out += self.edges[x][0] == v
        return out

    def neighbour(self, v: int, e: int) -> int:
        u, w = self.edges[e]
        return w if u == v else u

    @cached_property
    def _halfedge_index(self) -> dict[tuple[int, HalfEdge], int]:
        return {(v, he): j for v, rot in enumerate(self.rotations) for j, he in enumerate(rot)}

    def _dfs(self) -> tuple[str, tuple[int, ...], tuple[int, ...]]:
        """Anchored traversal: (key, tokens, vertices in preorder)."""
        root = next(
            (v for v, rot in enumerate(self.rotations) if ("L", 0) in rot), None
        )
        if root is None:
            raise ValueError("no vertex holds leaf 0")
        parts: list[str] = []
        tokens: list[int] = []
        order: list[int] = []
        seen: set[int] = set()
        where = self._halfedge_index

        def visit(v: int, start: int, include_start: bool) -> None:
            if v in seen:
                raise ValueError("graph has a cycle")
            seen.add(v)
            order.append(v)
            rot = self.rotations[v]
            m = len(rot)
            parts.append("(")
            for j in range(0 if include_start else 1, m):
                kind, x = rot[(start + j) % m]
                if kind == "L":
                    parts.append(f"L{x}")
                    tokens.append(LEAF)
                else:
                    u, w = self.edges[x]
                    other = w if u == v else u
                    parts.append(">" if u == v else "<")
                    tokens.append(OUT if u == v else IN)
                    visit(other, where[(other, ("E", x))], False)
                    tokens.append(CLOSE)
            parts.append(")")

        visit(root, where[(root, ("L", 0))], True)
        if len(seen) != self.n_vertices:
            raise ValueError("graph is disconnected")
        # the root's parentheses are implicit in the token form
        return "".join(parts), tuple(tokens), tuple(order)

    @cached_property
    def key(self) -> str:
        return self._dfs()[0]

    @cached_property
    def tokens(self) -> tuple[int, ...]:
        return self._dfs()[1]

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        return self._dfs()[2]

    @property
    def code(self) -> tuple[int, int]:
        return tokens_to_code(self.tokens)

    def canonical(self) -> "PlanarTreeCell":
        """Same tree with vertices numbered in anchored preorder."""
        return PlanarTreeCell.from_tokens(self.arity, self.tokens)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlanarTreeCell):
            return NotImplemented
        return self.arity == other.arity and self.key == other.key

    def __hash__(self) -> int:
        return hash((self.arity, self.key))

    def __repr__(self) -> str:
        try:
            return f"PlanarTreeCell({self.arity}, {self.key})"
        except ValueError:
            return f"PlanarTreeCell({self.arity}, rotations={self.rotations}, edges={self.edges})"

    def to_record(self) -> dict:
        """Structured form: vertices with rotations, directed edges, leaf bindings."""
        leaves = {}
        for v, rot in enumerate(self.rotations):
            for kind, x in rot:
                if kind == "L":
                    leaves[x] = v
        return {
            "key": self.key,
            "vertices": [
                [f"L{x}" if kind == "L" else f"E{x}" for kind, x in rot]
                for rot in self.rotations
            ],
            "edges": [list(e) for e in self.edges],
            "leaves": [leaves[p] for p in sorted(leaves)],
        }


def validate(cell: PlanarTreeCell, arity: Arity | None = None) -> list[Violation]:
    """All rule violations of ``cell`` against ``arity``; empty means valid."""
    arity = cell.arity if arity is None else arity
    n = arity.n_leaves
    out: list[Violation] = []
    nv = cell.n_vertices
    if nv == 0:
        return [Violation("empty", "cell", "no internal vertices")]

    seen_leaves: dict[int, int] = {}
    seen_edges: dict[int, list[int]] = {}
    for v, rot in enumerate(cell.rotations):
        for kind, x in rot:
            if kind == "L":
                if not 0 <= x < n:
                    out.append(Violation("leaf-binding", f"vertex {v}", f"leaf {x} outside 0..{n - 1}"))
                elif x in seen_leaves:
                    out.append(Violation("leaf-binding", f"vertex {v}", f"leaf {x} bound twice"))
                else:
                    seen_leaves[x] = v
            elif kind == "E":
                seen_edges.setdefault(x, []).append(v)
            else:
                out.append(Violation("half-edge", f"vertex {v}", f"unknown half-edge kind {kind!r}"))
    for p in range(n):
        if p not in seen_leaves:
            out.append(Violation("leaf-binding", f"leaf {p}", "boundary leaf not attached"))
    for e, (u, w) in enumerate(cell.edges):
        ends = sorted(seen_edges.get(e, []))
        if u == w:
            out.append(Violation("edge-binding", f"edge {e}", "self-loop"))
        elif not (0 <= u < nv and 0 <= w < nv) or ends != sorted((u, w)):
            out.append(Violation("edge-binding", f"edge {e}", f"half-edges at {ends} do not match ({u}->{w})"))
    for e in seen_edges:
        if not 0 <= e < len(cell.edges):
            out.append(Violation("edge-binding", f"edge {e}", "half-edge names an unknown edge"))
    if out:
        return out

    if len(cell.edges) != nv - 1:
        out.append(Violation("not-a-tree", "cell", f"{nv} vertices but {len(cell.edges)} edges"))
    adj = [[] for _ in range(nv)]
    for u, w in cell.edges:
        adj[u].append(w)
        adj[w].append(u)
    reach = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in reach:
                reach.add(w)
                queue.append(w)
    if len(reach) != nv:
        out.append(Violation("not-a-tree", "cell", "graph is disconnected"))
    if out:
        return out

    for v in range(nv):
        val = cell.valence(v)
        outd = cell.out_degree(v)
        if val < 2:
            out.append(Violation("dangling", f"vertex {v}", f"internal vertex of valence {val}"))
        elif outd == 0:
            out.append(Violation("sink", f"vertex {v}", "every incident edge is incoming"))
        elif val == 2 and outd != 2:
            out.append(
                Violation(
                    "regular point, not a cell label",
                    f"vertex {v}",
                    "valence-2 vertex with one incoming and one outgoing edge",
                )
            )

    # counterclockwise boundary walk must visit leaf p+1 right after leaf p
    where = cell._halfedge_index
    for p in range(n):
        v = seen_leaves[p]
        j = where[(v, ("L", p))]
        for _ in range(2 * len(cell.edges) + 1):
            rot = cell.rotations[v]
            kind, x = rot[(j + 1) % len(rot)]
            if kind == "L":
                break
            w = cell.neighbour(v, x)
            j = where[(w, ("E", x))]
            v = w
        if kind != "L" or x != (p + 1) % n:
            out.append(
                Violation("planarity", f"leaf {p}", f"boundary walk reaches leaf {x} instead of {(p + 1) % n}")
            )
            break
    return out


def is_valid(cell: PlanarTreeCell, arity: Arity | None = None) -> bool:
    return not validate(cell, arity)


def dimension(cell: PlanarTreeCell) -> int:
    return cell.n_vertices - 1


def syzygy_degree(cell: PlanarTreeCell, arity: Arity | None = None) -> int:
    arity = cell.arity if arity is None else arity
    return arity.n_leaves + arity.k - 3 - cell.n_vertices


def contract(cell: PlanarTreeCell, e: int) -> PlanarTreeCell:
    """Merge the endpoints of internal edge ``e``; result in canonical numbering."""
    if not 0 <= e < len(cell.edges):
        raise ValueError(f"edge {e} is not an internal edge")
    u, w = cell.edges[e]
    where = cell._halfedge_index
    rot_u = cell.rotations[u]
    rot_w = cell.rotations[w]
    iu = where[(u, ("E", e))]
    iw = where[(w, ("E", e))]
    inserted = [rot_w[(iw + j) % len(rot_w)] for j in range(1, len(rot_w))]
    merged = list(rot_u[:iu]) + inserted + list(rot_u[iu + 1 :])
    vmap = {}
    for v in range(cell.n_vertices):
        if v != w:
            vmap[v] = len(vmap)
    emap = {}
    for f in range(len(cell.edges)):
        if f != e:
            emap[f] = len(emap)
    rotations = []
    for v in range(cell.n_vertices):
        if v == w:
            continue
        rot = merged if v == u else cell.rotations[v]
        rotations.append(tuple(("E", emap[x]) if kind == "E" else (kind, x) for kind, x in rot))
    edges = []
    for f, (a, b) in enumerate(cell.edges):
        if f == e:
            continue
        a = u if a == w else a
        b = u if b == w else b
        edges.append((vmap[a], vmap[b]))
    return PlanarTreeCell(cell.arity, tuple(rotations), tuple(edges)).canonical()


def contractions(cell: PlanarTreeCell) -> list[tuple[int, PlanarTreeCell]]:
    return [(e, contract(cell, e)) for e in range(len(cell.edges))]


def bivalent_vertices(cell: PlanarTreeCell) -> list[int]:
    return [v for v in range(cell.n_vertices) if cell.valence(v) == 2 and cell.out_degree(v) == 2]


def _component_leaves(cell: PlanarTreeCell, start: int, removed: int) -> set[int]:
    leaves: set[int] = set()
    seen = {removed, start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for kind, x in cell.rotations[v]:
            if kind == "L":
                leaves.add(x)
            else:
                w = cell.neighbour(v, x)
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return leaves


def cut_class_of(cell: PlanarTreeCell, vertex: int) -> CutClass:
    """Class of the saddle cut through a bivalent vertex."""
    if cell.valence(vertex) != 2 or cell.out_degree(vertex) != 2:
        raise ValueError(f"vertex {vertex} is not a bivalent vertex with two outgoing edges")
    n = cell.arity.n_leaves
    kind, x = cell.rotations[vertex][0]
    if kind == "L":
        side = {x}
    else:
        side = _component_leaves(cell, cell.neighbour(vertex, x), vertex)
    other = set(range(n)) - side
    firsts = [p for p in side if (p - 1) % n not in side]
    lasts = [p for p in side if (p + 1) % n not in side]
    if len(firsts) != 1 or len(lasts) != 1:
        raise AssertionError(f"leaves {sorted(side)} beside vertex {vertex} are not a boundary arc")
    for part in (side, other):
        if not any(cell.arity.is_output(p) for p in part):
            raise AssertionError(f"cut at vertex {vertex} leaves no output among {sorted(part)}")
    return CutClass.from_arc(firsts[0], lasts[0], n)


def cut_classes(cell: PlanarTreeCell) -> frozenset[CutClass]:
    return frozenset(cut_class_of(cell, v) for v in bivalent_vertices(cell))


def rotate_cell(cell: PlanarTreeCell, steps: int = 1) -> PlanarTreeCell:
    """Image of ``cell`` under rotating the disk by ``steps`` output blocks."""
    arity = cell.arity
    n = arity.n_leaves
    offset = arity.output_positions[steps % arity.k]
    rots = tuple(
        tuple(("L", (x - offset) % n) if kind == "L" else (kind, x) for kind, x in rot)
        for rot in cell.rotations
    )
    return PlanarTreeCell(arity.rotated(steps), rots, cell.edges).canonical()


def enumerate_cells(arity: Arity, max_n: int | None = None) -> list[PlanarTreeCell]:
    """Every valid cell exactly once, in sorted key order."""
    from ._enumerate import enumerate_codes

    check_size(arity, max_n)
    hi, lo, _ = enumerate_codes(arity)
    return [PlanarTreeCell.from_code(arity, int(h), int(l)) for h, l in zip(hi, lo)]


def cells_by_degree(arity: Arity, max_n: int | None = None) -> dict[int, list[PlanarTreeCell]]:
    out: dict[int, list[PlanarTreeCell]] = {}
    for cell in enumerate_cells(arity, max_n):
        out.setdefault(syzygy_degree(cell), []).append(cell)
    return dict(sorted(out.items()))
