from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.evaluation import EvaluationTrace, TraceStatus


class SequenceRecord(BaseModel):
    """One evaluated sequence as it appears in a report"""
    sequence: Tuple[int, ...] = Field(..., description="Canonical ids in evaluation order")
    levels: Tuple[float, ...] = Field(..., description="Level values up to the decision point")
    status: TraceStatus
    final_value: float

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_trace(cls, trace: EvaluationTrace) -> "SequenceRecord":
        return cls(
            sequence=trace.sequence,
            levels=trace.levels,
            status=trace.status,
            final_value=trace.levels[-1],
        )


class ClusterReport(BaseModel):
    """Outcome of one cluster in one cycle"""
    cluster_id: str
    sensor_ids: Tuple[int, ...] = Field(..., description="Config sensor ids in canonical order")
    evaluated: int = Field(..., ge=0)
    survivors: int = Field(..., ge=0)
    pruned: int = Field(..., ge=0)
    alarm: bool
    surviving_sequences: List[SequenceRecord] = Field(default_factory=list)
    pruned_sequences: List[SequenceRecord] = Field(default_factory=list)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_counts(self):
        """Counts add up and the alarm follows the survivors"""
        if self.survivors + self.pruned != self.evaluated:
            raise ValueError(
                f"survivors ({self.survivors}) + pruned ({self.pruned}) != evaluated ({self.evaluated})"
            )
        if self.alarm != (self.survivors > 0):
            raise ValueError("alarm flag must be set exactly when survivors exist")
        return self

    def survivor_values(self) -> Dict[Tuple[int, ...], float]:
        return {record.sequence: record.final_value for record in self.surviving_sequences}


class AlarmReport(BaseModel):
    """Per-cycle decision over all clusters"""
    timestamp: int
    alarm: bool
    clusters: List[ClusterReport]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_alarm(self):
        if self.alarm != any(cluster.alarm for cluster in self.clusters):
            raise ValueError("global alarm must be set exactly when a cluster alarms")
        return self

    def cluster(self, cluster_id: str) -> Optional[ClusterReport]:
        for report in self.clusters:
            if report.cluster_id == cluster_id:
                return report
        return None


class CycleFailure(BaseModel):
    """Error record for a cycle that could not be evaluated"""
    timestamp: Optional[int] = None
    error_type: str
    message: str
    details: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)


CycleOutcome = Union[AlarmReport, CycleFailure]


class RunSummary(BaseModel):
    """Aggregate view over one run"""
    cycles: int
    alarmed_cycles: List[int]
    failed_cycles: int
    alarm: bool

    @classmethod
    def calculate(cls, outcomes: List[CycleOutcome]) -> "RunSummary":
        alarmed = [o.timestamp for o in outcomes if isinstance(o, AlarmReport) and o.alarm]
        failed = sum(1 for o in outcomes if isinstance(o, CycleFailure))
        return cls(cycles=len(outcomes), alarmed_cycles=alarmed, failed_cycles=failed, alarm=bool(alarmed))


class RunReport(BaseModel):
    """Structured report document of one run"""
    summary: RunSummary
    cycles: List[Union[AlarmReport, CycleFailure]]
