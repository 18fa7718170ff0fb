from itertools import permutations
from math import factorial
from typing import Iterator, List, Optional, Sequence, Tuple
import logging

from app.utils.errors import GuardViolationError, SequenceError

logger = logging.getLogger(__name__)


def _advance(seq: List[int], start: int) -> bool:
    """In-place next lexicographic permutation of ``seq[start:]``"""
    pivot = len(seq) - 2
    while pivot >= start and seq[pivot] >= seq[pivot + 1]:
        pivot -= 1
    if pivot < start:
        return False

    successor = len(seq) - 1
    while seq[successor] <= seq[pivot]:
        successor -= 1
    seq[pivot], seq[successor] = seq[successor], seq[pivot]
    seq[pivot + 1:] = reversed(seq[pivot + 1:])
    return True


class SequenceStream:
    """
    Lazy lexicographic stream of the orderings of 1..n that begin with
    ``prefix``. Holds O(n) state. Single consumer; ``cursor`` and
    ``emitted`` are enough to resume it.
    """

    def __init__(self, n: int, prefix: Sequence[int] = ()):
        if n < 1:
            raise SequenceError(f"sensor count must be >= 1, got {n}", {"n": n})
        prefix = tuple(prefix)
        if len(set(prefix)) != len(prefix) or any(not 1 <= p <= n for p in prefix):
            raise SequenceError(
                f"prefix {list(prefix)} is not a partial ordering of 1..{n}",
                {"prefix": list(prefix), "n": n},
            )
        self.n = n
        self.prefix = prefix
        self.emitted = 0
        self._current: Optional[List[int]] = None
        self._exhausted = False

    @classmethod
    def resume(cls, n: int, prefix: Sequence[int], cursor: Optional[Sequence[int]], emitted: int) -> "SequenceStream":
        """Rebuild a stream positioned right after ``cursor``"""
        stream = cls(n, prefix)
        if cursor is not None:
            cursor = list(cursor)
            if sorted(cursor) != list(range(1, n + 1)) or tuple(cursor[:len(stream.prefix)]) != stream.prefix:
                raise SequenceError(
                    f"cursor {cursor} does not belong to this stream",
                    {"cursor": cursor, "prefix": list(stream.prefix)},
                )
            stream._current = cursor
        stream.emitted = emitted
        return stream

    @property
    def cursor(self) -> Optional[Tuple[int, ...]]:
        """Last emitted sequence, None before the first emission"""
        return tuple(self._current) if self._current is not None else None

    @property
    def total(self) -> int:
        return factorial(self.n - len(self.prefix))

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return self

    def __next__(self) -> Tuple[int, ...]:
        if self._exhausted:
            raise StopIteration
        if self._current is None:
            rest = sorted(set(range(1, self.n + 1)) - set(self.prefix))
            self._current = list(self.prefix) + rest
        elif not _advance(self._current, len(self.prefix)):
            self._exhausted = True
            raise StopIteration
        self.emitted += 1
        return tuple(self._current)

    def __repr__(self) -> str:
        return f"SequenceStream(n={self.n}, prefix={self.prefix}, emitted={self.emitted})"


def enumerate_sequences(n: int, guard: Optional[int] = None) -> SequenceStream:
    """Every ordering of 1..n exactly once, lexicographically"""
    if guard is not None and n > guard:
        raise GuardViolationError(
            f"refusing to enumerate {n}! orderings: cluster exceeds guard of {guard} sensors",
            {"n": n, "guard": guard},
        )
    return SequenceStream(n)


def partition_by_prefix(n: int, prefix_len: int) -> List[SequenceStream]:
    """
    Split the orderings of 1..n into n!/(n-prefix_len)! disjoint streams,
    one per ordered prefix, in lexicographic prefix order.
    """
    if not 1 <= prefix_len < n:
        raise SequenceError(
            f"prefix length must lie in 1..{n - 1}, got {prefix_len}",
            {"n": n, "prefix_len": prefix_len},
        )
    streams = [SequenceStream(n, prefix) for prefix in permutations(range(1, n + 1), prefix_len)]
    logger.debug(f"Partitioned n={n} into {len(streams)} streams by prefix length {prefix_len}")
    return streams


def shift_and_exchange(n: int) -> Iterator[Tuple[int, ...]]:
    """
    Literal recursive positioning procedure: at the last two positions
    emit, swap the pair and emit again; elsewhere recurse with root + 1 and
    rotate the suffix starting at root, looping ``i = 0 .. n`` inclusive.

    Kept to characterize the procedure, not to drive evaluation: it is
    exact for n = 2 but revisits orderings and misses leaders for n >= 3.
    """
    if n < 2:
        raise SequenceError(f"the positioning procedure needs n >= 2, got {n}", {"n": n})
    index = list(range(1, n + 1))

    def position(root: int) -> Iterator[Tuple[int, ...]]:
        if n == 2 or root == n - 2:
            yield tuple(index)
            index[n - 2], index[n - 1] = index[n - 1], index[n - 2]
            yield tuple(index)
        else:
            for _ in range(n + 1):
                yield from position(root + 1)
                index[root:] = index[root + 1:] + index[root:root + 1]

    yield from position(0)
