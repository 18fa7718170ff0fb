from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Optional, Tuple


class TraceStatus(str, Enum):
    SURVIVED = "survived"
    PRUNED = "pruned"


@dataclass(frozen=True, slots=True)
class LeveledValue:
    """
    A value entering an interaction together with its evaluation level.

    A raw sensor has level 1; the accumulated value of k sensors has level k.
    """
    value: float
    level: int
    members: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"leveled value {self.value} outside [0, 1]")
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        if self.members:
            if self.level != len(self.members):
                raise ValueError(
                    f"level {self.level} inconsistent with {len(self.members)} member(s)"
                )

    @classmethod
    def raw(cls, sensor: int, value: float) -> "LeveledValue":
        return cls(value=value, level=1, members=frozenset((sensor,)))


@dataclass(frozen=True, slots=True)
class EvaluationTrace:
    """Level values of one evaluated sequence and whether it survived"""
    sequence: Tuple[int, ...]
    levels: Tuple[float, ...]
    status: TraceStatus
    pruned_at: Optional[int] = None

    @property
    def final_value(self) -> float:
        return self.levels[-1]

    @property
    def survived(self) -> bool:
        return self.status is TraceStatus.SURVIVED
