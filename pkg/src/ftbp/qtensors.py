"""Configuration-independent coefficient tensors of the mutual-potential series.

The rank-n tensor over the six-element index set (indices 1-3 address the
first simplex of a pair, 4-6 the second) holds moments of barycentric
monomials over the product of two standard simplices.  With m_i counting the
occurrences of index i in a multi-index, the entry is

    [m1! m2! m3! / (m1+m2+m3+3)!] * [m4! m5! m6! / (m4+m5+m6+3)!]

an exact rational number.  Entries are stored once per sorted multi-index;
contractions account for the multinomial multiplicity by expanding to dense
symmetric arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial

import numpy as np

#: Dense arrays above this order would not fit in memory (6^n entries).
MAX_ORDER = 8


class QOrderError(ValueError):
    """Requested series order above the supported cap."""


def q_entry(indices: tuple[int, ...]) -> Fraction:
    """Exact entry for a multi-index over {0..5} (any order of indices)."""
    counts = [0] * 6
    for i in indices:
        counts[i] += 1

    def block(ms):
        num = factorial(ms[0]) * factorial(ms[1]) * factorial(ms[2])
        return Fraction(num, factorial(sum(ms) + 3))

    return block(counts[:3]) * block(counts[3:])


@dataclass(frozen=True)
class QTensorSet:
    """Exact rational entries plus dense float arrays for ranks 0..max_order."""

    max_order: int
    exact: tuple[dict[tuple[int, ...], Fraction], ...]  # rank -> sorted index map
    dense: tuple[np.ndarray, ...]  # rank -> shape (6,)*rank

    def entry(self, *indices: int) -> Fraction:
        """Exact value for a multi-index (indices 0..5, any order)."""
        return self.exact[len(indices)][tuple(sorted(indices))]


def compute_q_tensors(max_order: int) -> QTensorSet:
    """Precompute tensors for every rank up to ``max_order``.

    Independent of any body or configuration; rank 0 is 1/36.
    """
    if max_order < 0:
        raise QOrderError("max_order must be >= 0")
    if max_order > MAX_ORDER:
        raise QOrderError(f"max_order {max_order} above supported cap {MAX_ORDER}")

    exact = []
    dense = []
    for rank in range(max_order + 1):
        table = {
            idx: q_entry(idx)
            for idx in combinations_with_replacement(range(6), rank)
        }
        exact.append(table)
        arr = np.empty((6,) * rank)
        for idx in product(range(6), repeat=rank):
            arr[idx] = float(table[tuple(sorted(idx))])
        dense.append(arr)
    return QTensorSet(max_order=max_order, exact=tuple(exact), dense=tuple(dense))
