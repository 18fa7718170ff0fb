from .sensor import (
    ClusterModel,
    EngineConfig,
    NormalizedFrame,
    ReadingFrame,
    SensorSpec,
    TraceMode,
    ValidatedModel,
)
from .evaluation import EvaluationTrace, LeveledValue, TraceStatus
from .report import AlarmReport, ClusterReport, CycleFailure, CycleOutcome, RunReport, RunSummary, SequenceRecord
from .manifest import AnomalyInjection, ReportFormat, RunManifest, SyntheticParameters
