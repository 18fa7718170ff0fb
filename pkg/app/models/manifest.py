from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ReportFormat(str, Enum):
    """Report output formats"""
    JSON = "json"
    CSV = "csv"


class AnomalyInjection(BaseModel):
    """Push one sensor toward its upper range bound at one cycle"""
    sensor_id: int = Field(..., ge=1, description="Config id of the sensor to disturb")
    cycle: int = Field(..., ge=0, description="Cycle (timestamp) receiving the anomaly")
    magnitude: float = Field(1.0, ge=0.0, le=1.0, description="Fraction of the gap to x_max that is closed")

    model_config = ConfigDict(frozen=True)

    @classmethod
    def parse(cls, text: str) -> "AnomalyInjection":
        """Parse 'SENSOR:CYCLE[:MAGNITUDE]'"""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"anomaly must look like SENSOR:CYCLE[:MAGNITUDE], got {text!r}")
        data = {"sensor_id": parts[0], "cycle": parts[1]}
        if len(parts) == 3:
            data["magnitude"] = parts[2]
        return cls.model_validate(data)


class SyntheticParameters(BaseModel):
    """Seeded generator settings; the seed fully determines the stream"""
    layout: Optional[List[int]] = Field(None, description="Cluster sizes when no config file is given")
    cycles: int = Field(10, ge=0, description="Number of acquisition cycles")
    seed: int = Field(0, ge=0, description="Random seed")
    baseline: float = Field(0.2, ge=0.0, le=1.0, description="Centre of the normal operating band (unit scale)")
    jitter: float = Field(0.01, ge=0.0, le=0.5, description="Half width of the normal operating band")
    anomalies: List[AnomalyInjection] = Field(default_factory=list)

    model_config = ConfigDict(frozen=True)

    @field_validator("layout")
    @classmethod
    def validate_layout(cls, v):
        """Every cluster holds at least one sensor"""
        if v is not None:
            if not v:
                raise ValueError("layout must name at least one cluster")
            if any(size < 1 for size in v):
                raise ValueError(f"cluster sizes must be >= 1, got {v}")
        return v

    @model_validator(mode="after")
    def validate_band(self):
        """Operating band stays inside the unit scale"""
        if self.baseline - self.jitter < 0.0 or self.baseline + self.jitter > 1.0:
            raise ValueError(
                f"baseline {self.baseline} +/- jitter {self.jitter} leaves the unit interval"
            )
        return self


class RunManifest(BaseModel):
    """Everything one CLI run needs"""
    config_path: Optional[Path] = None
    readings_path: Optional[Path] = None
    synthetic: Optional[SyntheticParameters] = None
    output_format: ReportFormat = ReportFormat.JSON
    output_path: Optional[Path] = None
    couplings_dir: Optional[Path] = None
    save_readings_path: Optional[Path] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_sources(self):
        """Exactly one readings source, and a way to obtain the sensors"""
        if (self.readings_path is None) == (self.synthetic is None):
            raise ValueError("give exactly one readings source: a readings file or synthetic parameters")
        if self.config_path is None and (self.synthetic is None or self.synthetic.layout is None):
            raise ValueError("a config file is required unless a synthetic layout is given")
        return self
