"""Representation labels used along the Sp(2n) fusion chain."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import DomainError


def rep_dimension(n: int, k: int) -> int:
    """Dimension of the k-th fundamental representation {k} of Sp(2n)."""
    if not 1 <= k <= n:
        raise DomainError(f"fundamental index k={k} outside 1..{n}")
    lower = comb(2 * n, k - 2) if k >= 2 else 0
    return comb(2 * n, k) - lower


@dataclass(frozen=True)
class RepLabel:
    """``kind`` is 'trivial', 'fundamental' ({k}) or 'mixed' ({1;k})."""

    kind: str
    index: int
    dim: int

    @classmethod
    def trivial(cls) -> "RepLabel":
        return cls("trivial", 0, 1)

    @classmethod
    def fundamental(cls, n: int, k: int) -> "RepLabel":
        if k == 0:
            return cls.trivial()
        return cls("fundamental", k, rep_dimension(n, k))

    @classmethod
    def mixed(cls, n: int, m: int) -> "RepLabel":
        # {1;m} only ever appears as the complement in {1} x {m}
        total = 2 * n * rep_dimension(n, m)
        lower = rep_dimension(n, m - 1) if m > 1 else 1
        upper = rep_dimension(n, m + 1) if m < n else 0
        return cls("mixed", m, total - lower - upper)

    def __str__(self) -> str:
        if self.kind == "trivial":
            return "{0}"
        if self.kind == "fundamental":
            return "{%d}" % self.index
        return "{1;%d}" % self.index
