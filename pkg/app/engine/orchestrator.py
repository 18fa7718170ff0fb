from contextlib import contextmanager
from multiprocessing import Pool
from typing import Iterable, Iterator, List, Optional, Tuple
import logging

from app.engine.coupling import build_table
from app.engine.enumerator import SequenceStream, enumerate_sequences, partition_by_prefix
from app.engine.evaluator import evaluate_chain, survives
from app.engine.normalization import normalize_frame
from app.models.evaluation import EvaluationTrace
from app.models.report import AlarmReport, ClusterReport, CycleFailure, CycleOutcome, SequenceRecord
from app.models.sensor import ClusterModel, EngineConfig, NormalizedFrame, ReadingFrame, TraceMode, ValidatedModel
from app.utils.errors import EngineError, FrameOrderError, GuardViolationError
from app.utils.helpers import LoggingHelper

logger = logging.getLogger(__name__)

PartitionTask = Tuple[NormalizedFrame, int, Tuple[int, ...], EngineConfig]
PartitionResult = Tuple[int, List[EvaluationTrace], int, List[EvaluationTrace]]


def _evaluate_partition(task: PartitionTask) -> PartitionResult:
    """Evaluate one prefix stream; top level so worker processes can unpickle it"""
    frame, n, prefix, cfg = task
    table = build_table(n)
    stream = SequenceStream(n, prefix) if prefix else enumerate_sequences(n)
    keep_pruned = cfg.trace_mode is TraceMode.FULL

    survived: List[EvaluationTrace] = []
    pruned: List[EvaluationTrace] = []
    pruned_count = 0
    for sequence in stream:
        trace = evaluate_chain(sequence, frame, table, cfg)
        if survives(trace):
            survived.append(trace)
        else:
            pruned_count += 1
            if keep_pruned:
                pruned.append(trace)
    return stream.emitted, survived, pruned_count, pruned


@contextmanager
def worker_pool(cfg: EngineConfig):
    """Process pool for cfg.workers > 1, otherwise no pool"""
    if cfg.workers <= 1:
        yield None
        return
    logger.info(f"Starting worker pool with {cfg.workers} processes")
    with Pool(processes=cfg.workers) as pool:
        yield pool


def check_guard(model: ValidatedModel, cfg: Optional[EngineConfig] = None) -> None:
    """Refuse clusters whose n_c! orderings exceed the configured guard"""
    cfg = cfg or model.config
    if not cfg.enforce_guard:
        return
    too_large = {cluster.cluster_id: cluster.n for cluster in model.clusters if cluster.n > cfg.max_sensors_guard}
    if too_large:
        raise GuardViolationError(
            f"cluster(s) {too_large} exceed the guard of {cfg.max_sensors_guard} sensors; "
            f"raise max_sensors_guard or disable the guard explicitly",
            {"clusters": too_large, "guard": cfg.max_sensors_guard},
        )


def evaluate_cluster(
    cluster: ClusterModel,
    frame: NormalizedFrame,
    cfg: EngineConfig,
    pool=None,
) -> ClusterReport:
    """Exhaustively evaluate one cluster against a normalized whole-network frame"""
    local = cluster.localize(frame)
    n = cluster.n

    if n < 2:
        # no pair to interact: nothing evaluated, nothing to alarm on
        return ClusterReport(
            cluster_id=cluster.cluster_id,
            sensor_ids=cluster.sensor_ids,
            evaluated=0,
            survivors=0,
            pruned=0,
            alarm=False,
        )

    if pool is not None and n > 2:
        tasks = [(local, n, stream.prefix, cfg) for stream in partition_by_prefix(n, 1)]
        results = pool.map(_evaluate_partition, tasks)
    else:
        results = [_evaluate_partition((local, n, (), cfg))]

    evaluated = sum(result[0] for result in results)
    survived = sorted((trace for result in results for trace in result[1]), key=lambda t: t.sequence)
    pruned_count = sum(result[2] for result in results)
    pruned = sorted((trace for result in results for trace in result[3]), key=lambda t: t.sequence)

    report = ClusterReport(
        cluster_id=cluster.cluster_id,
        sensor_ids=cluster.sensor_ids,
        evaluated=evaluated,
        survivors=len(survived),
        pruned=pruned_count,
        alarm=bool(survived),
        surviving_sequences=(
            [SequenceRecord.from_trace(trace) for trace in survived]
            if cfg.trace_mode is not TraceMode.NONE else []
        ),
        pruned_sequences=[SequenceRecord.from_trace(trace) for trace in pruned],
    )
    LoggingHelper.log_cycle(
        frame.timestamp,
        cluster.cluster_id,
        evaluated=report.evaluated,
        survivors=report.survivors,
        pruned=report.pruned,
    )
    return report


def run_cycle(
    frame: ReadingFrame,
    model: ValidatedModel,
    cfg: Optional[EngineConfig] = None,
    pool=None,
) -> AlarmReport:
    """
    Evaluate one acquisition cycle: normalize the frame, evaluate every
    ordering of every cluster and alarm if any chain survives. Clusters are
    independent and nothing is carried over from earlier cycles.

    When ``cfg.workers > 1`` and no pool is passed, a pool is created for
    this cycle only; run_stream shares one pool across cycles instead.
    """
    cfg = cfg or model.config
    check_guard(model, cfg)
    normalized = normalize_frame(frame, model)

    if pool is None and cfg.workers > 1:
        with worker_pool(cfg) as own_pool:
            clusters = [evaluate_cluster(cluster, normalized, cfg, own_pool) for cluster in model.clusters]
    else:
        clusters = [evaluate_cluster(cluster, normalized, cfg, pool) for cluster in model.clusters]

    report = AlarmReport(
        timestamp=frame.timestamp,
        alarm=any(cluster.alarm for cluster in clusters),
        clusters=clusters,
    )
    if report.alarm:
        alarmed = [cluster.cluster_id for cluster in clusters if cluster.alarm]
        logger.warning(f"Alarm raised at cycle {frame.timestamp} by cluster(s) {alarmed}")
    return report


def iter_stream(
    frames: Iterable[ReadingFrame],
    model: ValidatedModel,
    cfg: Optional[EngineConfig] = None,
) -> Iterator[CycleOutcome]:
    """Lazily evaluate frames in order; failures become CycleFailure records unless fail_fast"""
    cfg = cfg or model.config
    check_guard(model, cfg)

    last_timestamp: Optional[int] = None
    with worker_pool(cfg) as pool:
        for frame in frames:
            try:
                if last_timestamp is not None and frame.timestamp <= last_timestamp:
                    raise FrameOrderError(
                        f"frame {frame.timestamp} does not follow frame {last_timestamp}",
                        {"timestamp": frame.timestamp, "previous": last_timestamp},
                    )
                last_timestamp = frame.timestamp
                yield run_cycle(frame, model, cfg, pool)
            except EngineError as e:
                if cfg.fail_fast:
                    raise
                LoggingHelper.log_error(e, f"cycle {frame.timestamp}")
                yield CycleFailure(timestamp=frame.timestamp, **e.to_dict())


def run_stream(
    frames: Iterable[ReadingFrame],
    model: ValidatedModel,
    cfg: Optional[EngineConfig] = None,
) -> List[CycleOutcome]:
    """One outcome per frame, in frame order"""
    return list(iter_stream(frames, model, cfg))
