from typing import Iterator, Mapping, Protocol, Sequence, Tuple
import logging

from app.engine.coupling import CouplingTable
from app.models.evaluation import EvaluationTrace, LeveledValue, TraceStatus
from app.models.sensor import EngineConfig, NormalizedFrame
from app.utils.errors import SequenceError

logger = logging.getLogger(__name__)


class InteractionScheme(Protocol):
    """Combines two leveled values under a coupling weight"""

    def __call__(self, x1: float, l1: int, x2: float, l2: int, a: float) -> float:
        ...


def weighted_interaction(x1: float, l1: int, x2: float, l2: int, a: float) -> float:
    """E = a * (x1 / (l1 + 1) + x2 / (l2 + 1))"""
    return a * (x1 / (l1 + 1) + x2 / (l2 + 1))


def evaluate_pair(
    x1: LeveledValue,
    x2: LeveledValue,
    a: float,
    scheme: InteractionScheme = weighted_interaction,
) -> float:
    """Interaction value of two leveled inputs under coupling ``a``"""
    return scheme(x1.value, x1.level, x2.value, x2.level, a)


def _check_sequence(sequence: Sequence[int], values: Mapping[int, float], table: CouplingTable) -> None:
    n = table.n
    if len(sequence) < 2:
        raise SequenceError(
            f"a chain needs at least 2 sensors, got {list(sequence)}",
            {"sequence": list(sequence)},
        )
    if sorted(sequence) != list(range(1, n + 1)):
        raise SequenceError(
            f"sequence {list(sequence)} is not a permutation of 1..{n}",
            {"sequence": list(sequence), "n": n},
        )
    missing = [index for index in range(1, n + 1) if index not in values]
    if missing:
        raise SequenceError(
            f"frame has no value for canonical sensor(s) {missing}",
            {"missing": missing},
        )


def iter_levels(
    sequence: Sequence[int],
    values: Mapping[int, float],
    table: CouplingTable,
    scheme: InteractionScheme = weighted_interaction,
) -> Iterator[float]:
    """
    Lazily yield the level values E1, E2, ... of a chain (unchecked).

    s1 and s2 interact first, both at level 1. The accumulated value of the
    first k sensors then interacts at level k with the raw sensor s(k+1).
    The weight of that step is ``weight_sum / pair_count``, which equals
    ``coupling_set(sequence[:k + 1], n)``; the sum is extended by the k new
    pairs instead of being recomputed over the whole prefix.
    """
    first, second = sequence[0], sequence[1]
    weight_sum = table.pair(first, second)
    pair_count = 1
    value = scheme(values[first], 1, values[second], 1, weight_sum)
    yield value

    for k in range(2, len(sequence)):
        incoming = sequence[k]
        # extend the prefix pair sum by the pairs the incoming sensor forms
        for member in sequence[:k]:
            weight_sum += table.pair(member, incoming)
        pair_count += k
        value = scheme(value, k, values[incoming], 1, weight_sum / pair_count)
        yield value


def evaluate_levels(
    sequence: Sequence[int],
    frame: NormalizedFrame,
    table: CouplingTable,
    scheme: InteractionScheme = weighted_interaction,
) -> Tuple[float, ...]:
    """All n - 1 level values of a chain, without any threshold"""
    _check_sequence(sequence, frame.values, table)
    return tuple(iter_levels(sequence, frame.values, table, scheme))


def trace_from_levels(sequence: Sequence[int], levels: Sequence[float], threshold: float) -> EvaluationTrace:
    """Decide survival of fully computed levels, truncating at the pruning level"""
    for position, value in enumerate(levels, start=1):
        if value <= threshold:
            return EvaluationTrace(
                sequence=tuple(sequence),
                levels=tuple(levels[:position]),
                status=TraceStatus.PRUNED,
                pruned_at=position,
            )
    return EvaluationTrace(sequence=tuple(sequence), levels=tuple(levels), status=TraceStatus.SURVIVED)


def evaluate_chain(
    sequence: Sequence[int],
    frame: NormalizedFrame,
    table: CouplingTable,
    cfg: EngineConfig,
    scheme: InteractionScheme = weighted_interaction,
) -> EvaluationTrace:
    """
    Evaluate one sequence as a left-deep chain.

    With ``cfg.prune`` the chain stops at the first value ``<= threshold``;
    without it every level is computed and survival is decided afterwards.
    Both paths return the same trace.
    """
    if not cfg.prune:
        return trace_from_levels(sequence, evaluate_levels(sequence, frame, table, scheme), cfg.threshold)

    _check_sequence(sequence, frame.values, table)
    threshold = cfg.threshold
    levels = []
    for value in iter_levels(sequence, frame.values, table, scheme):
        levels.append(value)
        if value <= threshold:
            return EvaluationTrace(
                sequence=tuple(sequence),
                levels=tuple(levels),
                status=TraceStatus.PRUNED,
                pruned_at=len(levels),
            )
    return EvaluationTrace(sequence=tuple(sequence), levels=tuple(levels), status=TraceStatus.SURVIVED)


def survives(trace: EvaluationTrace) -> bool:
    """True iff every level of the trace strictly exceeded the threshold"""
    return trace.status is TraceStatus.SURVIVED
