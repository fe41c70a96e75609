"""Synthetic temperature sensors.

Datasheet accuracy is a half-width of a uniform error distribution; its
standard uncertainty is accuracy/sqrt(3).  Readings come on a fixed period
grid and successive noise draws are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .uncertain import UncertainReal

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SensorModel:
    accuracy: float          # degC, half-width of uniform error
    period: float = 2.0      # s, minimum time between readings
    std: float = field(init=False)

    def __post_init__(self) -> None:
        if self.accuracy < 0.0:
            raise ValueError(f"accuracy must be >= 0, got {self.accuracy}")
        if self.period <= 0.0:
            raise ValueError(f"period must be > 0, got {self.period}")
        object.__setattr__(self, "std", self.accuracy / SQRT3)


@dataclass(frozen=True)
class SensorReading:
    raw: float
    timestamp: float
    sensor_id: str


def sample(truth_temp: float, model: SensorModel, rng: np.random.Generator,
           timestamp: float = 0.0, sensor_id: str = "s") -> SensorReading:
    """Draw one reading: truth plus Uniform(-accuracy, +accuracy) noise."""
    noise = rng.uniform(-model.accuracy, model.accuracy) if model.accuracy > 0.0 else 0.0
    return SensorReading(raw=truth_temp + noise, timestamp=timestamp, sensor_id=sensor_id)


def to_uncertain(reading: SensorReading, model: SensorModel) -> UncertainReal:
    """Attach the sensor's standard uncertainty to a raw reading."""
    return UncertainReal(reading.raw, model.std)


def average(readings: list[UncertainReal]) -> UncertainReal:
    """Mean of independent readings; std is (1/n) * sqrt(sum sigma_i^2)."""
    if not readings:
        raise ValueError("cannot average an empty list of readings")
    n = len(readings)
    mean = sum(r.mean for r in readings) / n
    std = math.sqrt(sum(r.std * r.std for r in readings)) / n
    return UncertainReal(mean, std)
