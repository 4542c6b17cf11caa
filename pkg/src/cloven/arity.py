"""Arity tuples ``(k; i_1, ..., i_k)`` and the boundary-leaf convention.

Leaves are numbered ``0..N-1`` counterclockwise: leaf 0 is output 1, followed
by ``i_1`` input leaves, then output 2, then ``i_2`` inputs, and so on.  Gap
``j`` sits between leaf ``j`` and leaf ``j+1 (mod N)``.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass
from functools import cached_property

__all__ = [
    "Arity",
    "Role",
    "SizeGuardError",
    "boundary_sequence",
    "default_max_n",
    "check_size",
]

DEFAULT_MAX_N = 10


class SizeGuardError(RuntimeError):
    """Raised when an arity exceeds the configured total-leaf guard."""


class Role(enum.Enum):
    OUTPUT = "O"
    INPUT = "I"

    def __repr__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Arity:
    k: int
    inputs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(i) for i in self.inputs))
        if not isinstance(self.k, int) or self.k < 2:
            raise ValueError(f"need k >= 2 outputs, got {self.k!r}")
        if len(self.inputs) != self.k:
            raise ValueError(
                f"expected {self.k} input counts, got {len(self.inputs)}"
            )
        if any(i < 0 for i in self.inputs):
            raise ValueError(f"input counts must be non-negative: {self.inputs}")

    @classmethod
    def of(cls, *counts: int) -> "Arity":
        """``Arity.of(1, 0)`` is ``(2; 1, 0)``."""
        return cls(len(counts), tuple(counts))

    @classmethod
    def parse(cls, text: str) -> "Arity":
        """Parse ``"(2;1,0)"``, ``"2;1,0"`` or ``"2:1,0"``."""
        m = re.fullmatch(r"\s*\(?\s*(\d+)\s*[;:]\s*([\d,\s]*)\)?\s*", text)
        if not m:
            raise ValueError(f"malformed arity {text!r}")
        k = int(m.group(1))
        body = m.group(2).strip()
        inputs = tuple(int(x) for x in body.split(",") if x.strip()) if body else ()
        return cls(k, inputs)

    def __str__(self) -> str:
        return f"({self.k};{','.join(map(str, self.inputs))})"

    @property
    def n_leaves(self) -> int:
        return self.k + sum(self.inputs)

    N = n_leaves

    @property
    def top_dimension(self) -> int:
        """Dimension ``2k + sum(i) - 4`` of the regularized moduli space."""
        return 2 * self.k + sum(self.inputs) - 4

    @property
    def max_vertices(self) -> int:
        return self.n_leaves + self.k - 3

    @cached_property
    def roles(self) -> tuple[Role, ...]:
        out: list[Role] = []
        for i in self.inputs:
            out.append(Role.OUTPUT)
            out.extend([Role.INPUT] * i)
        return tuple(out)

    @cached_property
    def output_positions(self) -> tuple[int, ...]:
        return tuple(p for p, r in enumerate(self.roles) if r is Role.OUTPUT)

    def is_output(self, leaf: int) -> bool:
        return self.roles[leaf % self.n_leaves] is Role.OUTPUT

    def rotated(self, steps: int = 1) -> "Arity":
        """The arity after rotating the disk by ``steps`` output blocks."""
        s = steps % self.k
        return Arity(self.k, self.inputs[s:] + self.inputs[:s])

    def rotation_representative(self) -> "Arity":
        """Lexicographically largest rotation; canonical for the cyclic action."""
        return max(self.rotated(s) for s in range(self.k))


def boundary_sequence(arity: Arity) -> list[Role]:
    return list(arity.roles)


def default_max_n() -> int:
    raw = os.environ.get("CLOVEN_MAX_N")
    if raw is None or not raw.strip():
        return DEFAULT_MAX_N
    return int(raw)


def check_size(arity: Arity, max_n: int | None = None) -> None:
    limit = default_max_n() if max_n is None else max_n
    if arity.n_leaves > limit:
        raise SizeGuardError(
            f"arity {arity} has N={arity.n_leaves} leaves, above the guard "
            f"N <= {limit}; raise it with --max-n or CLOVEN_MAX_N"
        )
