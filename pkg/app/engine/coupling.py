from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, List, Sequence
import logging

import numpy as np

from app.utils.errors import CouplingError

logger = logging.getLogger(__name__)


def _check_index(index: int, n: int) -> None:
    if n < 1:
        raise CouplingError(f"sensor count must be >= 1, got {n}", {"n": n})
    if not 1 <= index <= n:
        raise CouplingError(
            f"sensor index {index} out of range 1..{n}",
            {"index": index, "n": n},
        )


def coupling_pair(i: int, j: int, n: int) -> float:
    """
    Coupling a_ij = 1 - |i - j| / n of two canonical sensors. Indices are
    canonical ids, never positions inside a permuted sequence.
    """
    _check_index(i, n)
    _check_index(j, n)
    return 1.0 - abs(i - j) / n


def coupling_pair_exact(i: int, j: int, n: int) -> Fraction:
    """Exact rational form of coupling_pair"""
    _check_index(i, n)
    _check_index(j, n)
    return Fraction(n - abs(i - j), n)


class CouplingTable:
    """Immutable n x n coupling matrix of one cluster"""

    __slots__ = ("n", "entries", "_rows")

    def __init__(self, n: int, entries: np.ndarray):
        entries = np.array(entries, dtype=float)
        if entries.shape != (n, n):
            raise CouplingError(
                f"coupling matrix must be {n}x{n}, got {entries.shape}",
                {"n": n},
            )
        entries.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", entries)
        # nested tuples for the per-sequence hot loop
        object.__setattr__(self, "_rows", tuple(tuple(row) for row in entries.tolist()))

    def __setattr__(self, name, value):
        raise AttributeError("CouplingTable is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CouplingTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.n, self._rows))

    def __repr__(self) -> str:
        return f"CouplingTable(n={self.n})"

    def __reduce__(self):
        return (CouplingTable, (self.n, np.array(self.entries)))

    def pair(self, i: int, j: int) -> float:
        """Entry a_ij for canonical indices i, j (1-based)"""
        return self._rows[i - 1][j - 1]

    def numerators(self) -> np.ndarray:
        """Integer matrix n - |i - j|; dividing by n gives the table exactly"""
        idx = np.arange(1, self.n + 1)
        return self.n - np.abs(idx[:, None] - idx[None, :])

    def to_rows(self) -> List[List[float]]:
        return [list(row) for row in self._rows]


@lru_cache(maxsize=None)
def build_table(n: int) -> CouplingTable:
    """Full coupling matrix for a cluster of n sensors (cached per n)"""
    if n < 1:
        raise CouplingError(f"sensor count must be >= 1, got {n}", {"n": n})
    idx = np.arange(1, n + 1)
    entries = 1.0 - np.abs(idx[:, None] - idx[None, :]) / n
    logger.debug(f"Built coupling table for n={n}")
    return CouplingTable(n, entries)


def coupling_set(ids: Iterable[int], n: int) -> float:
    """
    Coupling of a group of sensors: the mean pairwise coupling over every
    unordered pair drawn from ``ids``.
    """
    members = sorted(set(ids))
    if len(members) < 2:
        raise CouplingError(
            f"set coupling needs at least 2 distinct sensors, got {members}",
            {"ids": members, "n": n},
        )
    for index in members:
        _check_index(index, n)

    total = 0.0
    count = 0
    for i, j in combinations(members, 2):
        total += 1.0 - abs(i - j) / n
        count += 1
    return total / count


def coupling_prefix(index: Sequence[int], root: int, n: int) -> float:
    """
    Weight of the first ``root`` sensors of ``index`` using the double
    loop ``w += 1 - |index[i] - index[j]| / n; b += 1`` over i < j.
    """
    if root < 2 or root > len(index):
        raise CouplingError(
            f"root must lie in 2..{len(index)}, got {root}",
            {"root": root, "n": n},
        )
    w = 0.0
    b = 0
    for i in range(root):
        for j in range(i + 1, root):
            w = w + (1 - abs(index[i] - index[j]) / n)
            b = b + 1
    return w / b
