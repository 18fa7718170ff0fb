from pathlib import Path
from typing import List, Optional, Union
import json
import logging

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.engine.normalization import format_validation_error, validate_config
from app.models.sensor import EngineConfig, SensorSpec, ValidatedModel
from app.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


class ConfigDocument(BaseModel):
    """On-disk config: sensors, optional cluster order, engine settings"""
    sensors: List[SensorSpec] = Field(..., min_length=1)
    clusters: Optional[List[str]] = None
    engine: EngineConfig

    model_config = ConfigDict(extra="forbid")


def parse_config(text: str, source: str = "<config>") -> ValidatedModel:
    """Parse and validate config text; errors name the line or field at fault"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"{source}:{e.lineno}:{e.colno}: {e.msg}",
            {"source": source, "line": e.lineno, "column": e.colno},
        ) from e

    try:
        document = ConfigDocument.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"{source}: {format_validation_error(e)}", {"source": source}) from e

    try:
        return validate_config(document.sensors, document.engine, document.clusters)
    except ConfigurationError as e:
        raise ConfigurationError(f"{source}: {e.detail}", {"source": source, **e.context}) from e


def load_config(path: Union[str, Path]) -> ValidatedModel:
    """Read a config file and return the validated model"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e.strerror}", {"source": str(path)}) from e

    model = parse_config(text, str(path))
    logger.info(f"Loaded config {path}")
    return model


def dump_config(model: ValidatedModel) -> str:
    """Render a validated model in the config file format"""
    document = {
        "sensors": [spec.model_dump(mode="json", by_alias=True) for spec in model.specs],
    }
    if model.declared_clusters is not None:
        document["clusters"] = list(model.declared_clusters)
    document["engine"] = model.config.model_dump(mode="json")
    return json.dumps(document, indent=2) + "\n"
