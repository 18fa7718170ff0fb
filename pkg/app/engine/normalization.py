from typing import Dict, Iterable, List, Optional, Sequence, Type, TypeVar, Union
import logging
import math

from pydantic import BaseModel, ValidationError

from app.models.sensor import (
    ClusterModel,
    EngineConfig,
    NormalizedFrame,
    ReadingFrame,
    SensorSpec,
    ValidatedModel,
)
from app.utils.errors import ConfigurationError, IncompleteFrameError, RangeViolationError
from app.utils.helpers import ValidationHelper

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def format_validation_error(error: ValidationError, prefix: str = "") -> str:
    """Flatten pydantic errors into 'path: message' lines"""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        path = ".".join(part for part in (prefix, location) if part)
        lines.append(f"{path}: {item['msg']}" if path else item["msg"])
    return "; ".join(lines)


def _revalidate(model_cls: Type[ModelT], value: Union[ModelT, dict], where: str) -> ModelT:
    # instances built with model_construct skip validators; run them again
    data = value.model_dump() if isinstance(value, BaseModel) else value
    try:
        return model_cls.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(format_validation_error(e, where), {"where": where}) from e


def validate_config(
    specs: Sequence[Union[SensorSpec, dict]],
    cfg: Union[EngineConfig, dict],
    clusters: Optional[Sequence[str]] = None,
) -> ValidatedModel:
    """
    Check sensor specs and engine settings and group sensors into clusters.

    Cluster order is ``clusters`` when given, otherwise first appearance.
    Within a cluster, configuration order defines the canonical indices
    1..n_c and is never re-sorted.
    """
    if not specs:
        raise ConfigurationError("no sensors configured")

    checked: List[SensorSpec] = [
        _revalidate(SensorSpec, spec, f"sensors.{position}") for position, spec in enumerate(specs)
    ]
    config = _revalidate(EngineConfig, cfg, "engine")

    duplicates = ValidationHelper.find_duplicates([spec.id for spec in checked])
    if duplicates:
        raise ConfigurationError(f"duplicate sensor id(s): {duplicates}", {"ids": duplicates})

    if clusters is not None:
        order = [str(cluster) for cluster in clusters]
        repeated = ValidationHelper.find_duplicates(order)
        if repeated:
            raise ConfigurationError(f"cluster(s) declared twice: {repeated}", {"clusters": repeated})
        undeclared = sorted({spec.cluster_id for spec in checked} - set(order))
        if undeclared:
            raise ConfigurationError(
                f"sensor(s) reference undeclared cluster(s): {undeclared}",
                {"clusters": undeclared},
            )
    else:
        order = list(dict.fromkeys(spec.cluster_id for spec in checked))

    grouped: Dict[str, List[SensorSpec]] = {cluster_id: [] for cluster_id in order}
    for spec in checked:
        grouped[spec.cluster_id].append(spec)

    empty = [cluster_id for cluster_id, members in grouped.items() if not members]
    if empty:
        raise ConfigurationError(f"empty cluster(s): {empty}", {"clusters": empty})

    model = ValidatedModel(
        specs=tuple(checked),
        config=config,
        clusters=tuple(ClusterModel(cluster_id=cluster_id, members=tuple(members)) for cluster_id, members in grouped.items()),
        declared_clusters=tuple(order) if clusters is not None else None,
    )
    logger.info(f"Validated {len(checked)} sensor(s) in clusters {model.cluster_sizes}")
    return model


def normalization_factor(spec: SensorSpec) -> float:
    """f = 1 / |x_max - x_min|"""
    width = abs(spec.x_max - spec.x_min)
    if width == 0:
        raise ConfigurationError(f"degenerate range for sensor {spec.id}", {"sensor": spec.id})
    return 1.0 / width


def normalize_value(spec: SensorSpec, raw: float) -> float:
    """
    Map a raw reading onto [0, 1]. Computed as a quotient, which equals
    f * (raw - x_min) and sends x_max to exactly 1.0.
    """
    if math.isnan(raw) or not spec.x_min <= raw <= spec.x_max:
        raise RangeViolationError(
            f"sensor {spec.id} ({spec.name or 'unnamed'}) read {raw}, outside [{spec.x_min}, {spec.x_max}]",
            {"sensor": spec.id, "value": raw, "min": spec.x_min, "max": spec.x_max},
        )
    return (raw - spec.x_min) / (spec.x_max - spec.x_min)


def normalize_frame(frame: ReadingFrame, specs: Union[ValidatedModel, Iterable[SensorSpec]]) -> NormalizedFrame:
    """Normalize every reading of a complete frame; out-of-range readings are errors"""
    spec_list = list(specs.specs if isinstance(specs, ValidatedModel) else specs)
    expected = [spec.id for spec in spec_list]

    missing = [sensor_id for sensor_id in expected if sensor_id not in frame.values]
    if missing:
        raise IncompleteFrameError(
            f"frame {frame.timestamp} is missing sensor(s) {missing}",
            {"timestamp": frame.timestamp, "missing": missing},
        )
    unknown = sorted(set(frame.values) - set(expected))
    if unknown:
        raise IncompleteFrameError(
            f"frame {frame.timestamp} has readings for unknown sensor(s) {unknown}",
            {"timestamp": frame.timestamp, "unknown": unknown},
        )

    return NormalizedFrame(
        timestamp=frame.timestamp,
        values={spec.id: normalize_value(spec, frame.values[spec.id]) for spec in spec_list},
    )
