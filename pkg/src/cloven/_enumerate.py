"""Vectorized enumeration of cell codes.

Cells are built over contiguous leaf arcs: the vertex holding leaf 0 takes
the arc ``1..N-1`` and splits it into consecutive items, each a single leaf
or a child subtree over a sub-arc.  Item sequences for every arc are kept as
integer arrays of right-aligned 2-bit token codes, grouped by token count
and by the two facts the vertex rules need (at least two items, at least one
outgoing item).  Concatenation is a broadcast shift-or, so whole families of
trees are produced per numpy call.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .arity import Arity, Role
from .planar_trees import CLOSE, IN, LEAF, OUT

__all__ = ["enumerate_codes", "max_tokens"]

_MASK64 = (1 << 64) - 1


def max_tokens(arity: Arity) -> int:
    """Token length of a top-dimensional cell: ``N + 2 (V_max - 1)``."""
    return arity.n_leaves + 2 * (arity.max_vertices - 1)


class _Codes:
    def __init__(self, dtype):
        self.dtype = dtype

    def const(self, value: int) -> np.ndarray:
        return np.array([value], dtype=self.dtype)

    def shift(self, bits: int):
        return np.uint64(bits) if self.dtype is np.uint64 else bits

    def join(self, a: np.ndarray, b: np.ndarray, b_tokens: int) -> np.ndarray:
        return ((a[:, None] << self.shift(2 * b_tokens)) | b[None, :]).ravel()

    def wrap(self, head: int, body: np.ndarray, body_tokens: int) -> np.ndarray:
        """``head`` token, then ``body``, then CLOSE."""
        top = self.const(head) << self.shift(2 * (body_tokens + 1))
        return top | (body << self.shift(2)) | self.const(CLOSE)


def _merge(groups: dict) -> dict:
    return {key: np.concatenate(parts) for key, parts in groups.items()}


def enumerate_codes(arity: Arity) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All cell codes of ``arity`` as sorted ``(hi, lo, n_tokens)`` arrays."""
    n = arity.n_leaves
    is_out = [r is Role.OUTPUT for r in arity.roles]
    wide = max_tokens(arity) > 32
    ops = _Codes(object if wide else np.uint64)

    # item[a, b]: {(tokens, outgoing_from_parent): codes}
    # seq[a, b]:  {(tokens, at_least_two_items, any_outgoing): codes}
    item: dict[tuple[int, int], dict] = {}
    seq: dict[tuple[int, int], dict] = {}
    for length in range(1, n):
        for a in range(1, n - length + 1):
            b = a + length - 1
            multi = defaultdict(list)
            for c in range(a, b):
                for (ta, oa), xa in item[a, c].items():
                    for (tb, _, ob), xb in seq[c + 1, b].items():
                        multi[ta + tb, True, oa | ob].append(ops.join(xa, xb, tb))
            multi = _merge(multi)

            plain = defaultdict(list)
            if a == b:
                plain[1, int(is_out[a])].append(ops.const(LEAF))
            for (t, _, o), x in multi.items():
                # a child entered along OUT sees an incoming edge, so it needs an outgoing item
                if o:
                    plain[t + 2, 1].append(ops.wrap(OUT, x, t))
                plain[t + 2, 0].append(ops.wrap(IN, x, t))
            plain = _merge(plain)

            # bivalent child: both edges outgoing, so it is entered along IN
            # and holds one outgoing item that is not itself bivalent
            items = defaultdict(list)
            for key, x in plain.items():
                items[key].append(x)
            for (t, o), x in plain.items():
                if o:
                    items[t + 2, 0].append(ops.wrap(IN, x, t))
            items = _merge(items)
            item[a, b] = items

            seq_ab = dict(multi)
            seq_ab.update({(t, False, o): x for (t, o), x in items.items()})
            seq[a, b] = seq_ab

    his, los, toks = [], [], []
    for (t, two, o), x in seq[1, n - 1].items():
        if not two and not o:
            continue  # leaf-0 vertex of valence 2 needs its other edge outgoing
        total = t + 1
        code = (ops.const(LEAF) << ops.shift(2 * t)) | x
        if wide:
            aligned = code << (128 - 2 * total)
            his.append((aligned >> 64).astype(np.uint64))
            los.append((aligned & _MASK64).astype(np.uint64))
        else:
            his.append(code << np.uint64(64 - 2 * total))
            los.append(np.zeros(len(code), dtype=np.uint64))
        toks.append(np.full(len(code), total, dtype=np.int16))
    hi = np.concatenate(his)
    lo = np.concatenate(los)
    tok = np.concatenate(toks)
    order = np.lexsort((lo, hi))
    return hi[order], lo[order], tok[order]
