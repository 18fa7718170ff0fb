from itertools import combinations, permutations
from math import factorial
from typing import Dict, List, Optional, Sequence
import logging

from app.models.evaluation import TraceStatus
from app.models.report import AlarmReport, ClusterReport, SequenceRecord
from app.models.sensor import EngineConfig, ReadingFrame, TraceMode, ValidatedModel
from app.utils.errors import IncompleteFrameError, OracleCapacityError, RangeViolationError

logger = logging.getLogger(__name__)

ORACLE_MAX_SENSORS = 8


def _pair_weight(i: int, j: int, n: int) -> float:
    return 1 - abs(i - j) / n


def _group_weight(ids: Sequence[int], n: int) -> float:
    pairs = list(combinations(ids, 2))
    return sum(_pair_weight(i, j, n) for i, j in pairs) / len(pairs)


def _full_chain(sequence: Sequence[int], x: Dict[int, float], n: int) -> List[float]:
    first, second = sequence[0], sequence[1]
    value = _pair_weight(first, second, n) * (x[first] / 2 + x[second] / 2)
    levels = [value]
    for k in range(2, n):
        weight = _group_weight(sequence[:k + 1], n)
        value = weight * (value / (k + 1) + x[sequence[k]] / 2)
        levels.append(value)
    return levels


def oracle_run_cycle(
    frame: ReadingFrame,
    model: ValidatedModel,
    cfg: Optional[EngineConfig] = None,
) -> AlarmReport:
    """
    Same contract as run_cycle, computed by brute force: textbook
    permutations, formulas written out, every level computed before
    survival is decided. Small clusters only.
    """
    cfg = cfg or model.config
    for cluster in model.clusters:
        if cluster.n > ORACLE_MAX_SENSORS:
            raise OracleCapacityError(
                f"cluster {cluster.cluster_id} has {cluster.n} sensors; the oracle handles at most {ORACLE_MAX_SENSORS}",
                {"cluster": cluster.cluster_id, "n": cluster.n},
            )

    expected = {spec.id for spec in model.specs}
    if set(frame.values) != expected:
        raise IncompleteFrameError(
            f"frame {frame.timestamp} does not cover exactly the configured sensors",
            {"timestamp": frame.timestamp},
        )

    reports = []
    for cluster in model.clusters:
        n = cluster.n
        x: Dict[int, float] = {}
        for position, spec in enumerate(cluster.members, start=1):
            raw = frame.values[spec.id]
            if not spec.x_min <= raw <= spec.x_max:
                raise RangeViolationError(
                    f"sensor {spec.id} read {raw}, outside [{spec.x_min}, {spec.x_max}]",
                    {"sensor": spec.id, "value": raw},
                )
            x[position] = (raw - spec.x_min) / (spec.x_max - spec.x_min)

        survivors: List[SequenceRecord] = []
        pruned: List[SequenceRecord] = []
        if n >= 2:
            for sequence in permutations(range(1, n + 1)):
                levels = _full_chain(sequence, x, n)
                failing = next((k for k, value in enumerate(levels, start=1) if not value > cfg.threshold), None)
                if failing is None:
                    survivors.append(
                        SequenceRecord(sequence=sequence, levels=tuple(levels), status=TraceStatus.SURVIVED, final_value=levels[-1])
                    )
                else:
                    kept = tuple(levels[:failing])
                    pruned.append(
                        SequenceRecord(sequence=sequence, levels=kept, status=TraceStatus.PRUNED, final_value=kept[-1])
                    )

        evaluated = factorial(n) if n >= 2 else 0
        reports.append(
            ClusterReport(
                cluster_id=cluster.cluster_id,
                sensor_ids=cluster.sensor_ids,
                evaluated=evaluated,
                survivors=len(survivors),
                pruned=evaluated - len(survivors),
                alarm=bool(survivors),
                surviving_sequences=survivors if cfg.trace_mode is not TraceMode.NONE else [],
                pruned_sequences=pruned if cfg.trace_mode is TraceMode.FULL else [],
            )
        )

    logger.debug(f"Oracle evaluated cycle {frame.timestamp}")
    return AlarmReport(
        timestamp=frame.timestamp,
        alarm=any(report.alarm for report in reports),
        clusters=reports,
    )
