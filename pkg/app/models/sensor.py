import math
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.engine.coupling import CouplingTable, build_table
from app.utils.helpers import ValidationHelper


class TraceMode(str, Enum):
    """How much per-sequence detail a report carries"""
    NONE = "none"
    SURVIVORS = "survivors"
    FULL = "full"


class SensorSpec(BaseModel):
    """Identity, physical range and cluster membership of one sensor"""
    id: int = Field(..., ge=1, description="Sensor identifier, referenced by readings files")
    name: str = Field("", max_length=200, description="Human-readable sensor name")
    unit: str = Field("", max_length=50, description="Physical unit, informational only")
    x_min: float = Field(..., alias="min", allow_inf_nan=False, description="Lower end of the physical range")
    x_max: float = Field(..., alias="max", allow_inf_nan=False, description="Upper end of the physical range")
    cluster_id: str = Field("default", alias="cluster", min_length=1, description="Cluster the sensor belongs to")

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @field_validator("name", "unit")
    @classmethod
    def strip_text(cls, v):
        """Trim surrounding whitespace"""
        return ValidationHelper.sanitize_string(v)

    @field_validator("cluster_id", mode="before")
    @classmethod
    def cluster_as_text(cls, v):
        """Accept numeric cluster labels from config files"""
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return str(v)
        return v

    @model_validator(mode="after")
    def validate_range(self):
        """Physical range must have positive width"""
        if not self.x_min < self.x_max:
            raise ValueError(
                f"degenerate range: min ({self.x_min}) must be strictly below max ({self.x_max})"
            )
        return self


class EngineConfig(BaseModel):
    """Engine settings shared by every cluster and cycle"""
    threshold: float = Field(..., description="Universal safety threshold, strictly inside (0, 1)")
    max_sensors_guard: int = Field(10, ge=1, description="Largest cluster evaluated without override")
    trace_mode: TraceMode = Field(TraceMode.SURVIVORS, description="Per-sequence detail kept in reports")
    prune: bool = Field(True, description="Stop a chain at the first level not exceeding the threshold")
    enforce_guard: bool = Field(True, description="Refuse clusters larger than max_sensors_guard")
    workers: int = Field(1, ge=1, le=64, description="Worker processes per cluster evaluation")
    fail_fast: bool = Field(False, description="Abort a stream on the first failing cycle")

    model_config = ConfigDict(frozen=True)

    @field_validator("threshold")
    @classmethod
    def validate_threshold(cls, v):
        """Threshold lies in the open unit interval"""
        if math.isnan(v) or not 0.0 < v < 1.0:
            raise ValueError(f"threshold out of open interval (0, 1): {v}")
        return v


class ReadingFrame(BaseModel):
    """Raw readings of one acquisition cycle, keyed by sensor id"""
    timestamp: int = Field(..., ge=0, description="Monotonic cycle stamp")
    values: Dict[int, float] = Field(default_factory=dict, description="Raw reading per sensor id")

    model_config = ConfigDict(frozen=True)


class NormalizedFrame(BaseModel):
    """Readings of one cycle mapped onto the unit scale"""
    timestamp: int = Field(..., ge=0)
    values: Dict[int, float] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    @field_validator("values")
    @classmethod
    def validate_unit_scale(cls, v):
        for sensor_id, value in v.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"normalized value {value} of sensor {sensor_id} outside [0, 1]")
        return v


class ClusterModel(BaseModel):
    """
    One cluster treated as an independent sensor network.

    Members keep configuration order; member k (1-based) has canonical
    index k, which is the index couplings are computed from.
    """
    cluster_id: str
    members: Tuple[SensorSpec, ...] = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def sensor_ids(self) -> Tuple[int, ...]:
        """Config sensor ids in canonical order"""
        return tuple(spec.id for spec in self.members)

    @property
    def table(self) -> CouplingTable:
        return build_table(self.n)

    def canonical_index(self, sensor_id: int) -> int:
        return self.sensor_ids.index(sensor_id) + 1

    def localize(self, frame: NormalizedFrame) -> NormalizedFrame:
        """Project a whole-network frame onto this cluster's canonical ids"""
        return NormalizedFrame(
            timestamp=frame.timestamp,
            values={
                index: frame.values[spec.id]
                for index, spec in enumerate(self.members, start=1)
            },
        )


class ValidatedModel(BaseModel):
    """Canonical sensor network produced by validate_config"""
    specs: Tuple[SensorSpec, ...]
    config: EngineConfig
    clusters: Tuple[ClusterModel, ...]
    declared_clusters: Optional[Tuple[str, ...]] = None

    model_config = ConfigDict(frozen=True)

    @property
    def cluster_sizes(self) -> Dict[str, int]:
        return {cluster.cluster_id: cluster.n for cluster in self.clusters}

    def spec_for(self, sensor_id: int) -> Optional[SensorSpec]:
        for spec in self.specs:
            if spec.id == sensor_id:
                return spec
        return None

    def with_config(self, **overrides: Any) -> "ValidatedModel":
        """Copy with engine settings replaced (validated again)"""
        config = EngineConfig.model_validate({**self.config.model_dump(), **overrides})
        return self.model_copy(update={"config": config})
