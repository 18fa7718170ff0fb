from typing import Iterator, List, Sequence
import logging

import numpy as np

from app.models.manifest import RunManifest, SyntheticParameters
from app.models.sensor import ReadingFrame, SensorSpec, ValidatedModel
from app.utils.errors import ManifestError

logger = logging.getLogger(__name__)

SYNTHETIC_MIN = 0.0
SYNTHETIC_MAX = 100.0


def synthetic_specs(layout: Sequence[int]) -> List[SensorSpec]:
    """Sensors for a cluster layout such as [4, 3]: ids 1.., clusters C1, C2, ..."""
    specs = []
    sensor_id = 1
    for position, size in enumerate(layout, start=1):
        for _ in range(size):
            specs.append(
                SensorSpec(
                    id=sensor_id,
                    name=f"sensor-{sensor_id}",
                    unit="%",
                    x_min=SYNTHETIC_MIN,
                    x_max=SYNTHETIC_MAX,
                    cluster_id=f"C{position}",
                )
            )
            sensor_id += 1
    return specs


def generate_synthetic(manifest: RunManifest, model: ValidatedModel) -> Iterator[ReadingFrame]:
    """
    Seeded frames inside every sensor's range.

    Normal readings are drawn uniformly from the baseline band; an anomaly
    moves its sensor the given fraction of the way to x_max (1.0 reads x_max).
    Draws do not depend on anomalies, so injecting one leaves every other
    reading unchanged.
    """
    params = manifest.synthetic
    if params is None:
        raise ManifestError("manifest carries no synthetic parameters")

    known = {spec.id for spec in model.specs}
    unknown = [anomaly.sensor_id for anomaly in params.anomalies if anomaly.sensor_id not in known]
    if unknown:
        raise ManifestError(f"anomaly references unknown sensor(s) {unknown}", {"sensors": unknown})

    return _synthetic_frames(params, model)


def _synthetic_frames(params: SyntheticParameters, model: ValidatedModel) -> Iterator[ReadingFrame]:
    low = params.baseline - params.jitter
    high = params.baseline + params.jitter
    rng = np.random.default_rng(params.seed)

    for cycle in range(params.cycles):
        draws = rng.uniform(low, high, size=len(model.specs))
        values = {}
        for spec, fraction in zip(model.specs, draws):
            width = spec.x_max - spec.x_min
            value = min(max(spec.x_min + float(fraction) * width, spec.x_min), spec.x_max)
            for anomaly in params.anomalies:
                if anomaly.sensor_id == spec.id and anomaly.cycle == cycle:
                    value = spec.x_max - (1.0 - anomaly.magnitude) * (spec.x_max - value)
                    logger.info(f"Injected anomaly on sensor {spec.id} at cycle {cycle}: {value}")
            values[spec.id] = value
        yield ReadingFrame(timestamp=cycle, values=values)
