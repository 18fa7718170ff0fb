from pathlib import Path
from typing import Dict, Iterable, List, Union
import csv
import logging

from app.models.sensor import ReadingFrame
from app.utils.errors import ReadingsError, ReportWriteError

logger = logging.getLogger(__name__)

READINGS_HEADER = ["timestamp", "sensor_id", "raw_value"]


def load_readings(path: Union[str, Path]) -> List[ReadingFrame]:
    """
    Group ``timestamp,sensor_id,raw_value`` rows into frames.

    Frames keep the order in which their timestamp first appears. A frame
    missing a sensor is returned as is; completeness is checked per cycle.
    """
    path = Path(path)
    grouped: Dict[int, Dict[int, float]] = {}
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            for line_no, row in enumerate(csv.reader(handle), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if line_no == 1 and [cell.strip() for cell in row] == READINGS_HEADER:
                    continue
                if len(row) != 3:
                    raise ReadingsError(
                        f"{path}:{line_no}: expected 3 fields (timestamp, sensor_id, raw_value), got {len(row)}",
                        {"line": line_no},
                    )
                try:
                    timestamp = int(row[0])
                    sensor_id = int(row[1])
                    raw_value = float(row[2])
                except ValueError as e:
                    raise ReadingsError(f"{path}:{line_no}: {e}", {"line": line_no}) from e
                if timestamp < 0:
                    raise ReadingsError(
                        f"{path}:{line_no}: negative timestamp {timestamp}",
                        {"line": line_no, "timestamp": timestamp},
                    )

                values = grouped.setdefault(timestamp, {})
                if sensor_id in values:
                    raise ReadingsError(
                        f"{path}:{line_no}: second reading for sensor {sensor_id} at timestamp {timestamp}",
                        {"line": line_no, "sensor": sensor_id, "timestamp": timestamp},
                    )
                values[sensor_id] = raw_value
    except OSError as e:
        raise ReadingsError(f"cannot read readings {path}: {e.strerror}", {"source": str(path)}) from e

    frames = [ReadingFrame(timestamp=timestamp, values=values) for timestamp, values in grouped.items()]
    logger.info(f"Loaded {len(frames)} frame(s) from {path}")
    return frames


def dump_readings(frames: Iterable[ReadingFrame], path: Union[str, Path]) -> List[ReadingFrame]:
    """Write frames as a readings file; returns the frames written"""
    path = Path(path)
    written = list(frames)
    try:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(READINGS_HEADER)
            for frame in written:
                for sensor_id, value in frame.values.items():
                    writer.writerow([frame.timestamp, sensor_id, repr(value)])
    except OSError as e:
        raise ReportWriteError(f"cannot write readings {path}: {e.strerror}", {"path": str(path)}) from e
    return written
