from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

PARAMETER_NAMES = ("J", "beta0", "dBzeff", "Bz", "T", "gamma_e", "t", "theta1", "phi1", "theta2", "phi2")

PARAMETER_DEFAULTS: Dict[str, float] = {
    "J": 1.0,
    "beta0": 0.0,
    "dBzeff": 0.0,
    "Bz": 0.0,
    "T": 0.05,
    "gamma_e": 1.0,
    "t": 0.0,
    "theta1": 0.0,
    "phi1": 0.0,
    "theta2": 0.0,
    "phi2": 0.0,
}


class Quantity(str, Enum):
    CHI = "chi"
    S_RHO = "S_rho"
    VALIDITY = "validity"
    WITNESS = "witness"
    Z = "Z"


class Spacing(str, Enum):
    LINEAR = "linear"
    LOG = "log"


class SweepAxis(BaseModel):
    """One grid axis. ``count = 1`` is a single point at ``start``."""

    name: str
    start: float
    stop: float
    count: int = Field(..., ge=1)
    spacing: Spacing = Spacing.LINEAR

    @field_validator("name")
    @classmethod
    def validate_name(cls, value: str) -> str:
        if value not in PARAMETER_NAMES:
            raise ValueError(f"Unknown parameter '{value}'.")
        return value

    @field_validator("start", "stop")
    @classmethod
    def validate_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("Axis bounds must be finite.")
        return value

    @model_validator(mode="after")
    def validate_range(self) -> "SweepAxis":
        if self.count == 1:
            if self.stop != self.start:
                raise ValueError("A single-point axis needs start = stop.")
        elif not self.start < self.stop:
            raise ValueError("Axis start must be below stop.")
        if self.spacing is Spacing.LOG and self.start <= 0.0:
            raise ValueError("Log spacing needs a positive start.")
        return self

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start], dtype=np.float64)
        if self.spacing is Spacing.LOG:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


class SweepConfig(BaseModel):
    quantity: Quantity
    axes: List[SweepAxis] = Field(..., min_length=1, max_length=2)
    fixed: Dict[str, float] = Field(default_factory=dict)
    output_path: Optional[Path] = None
    precision: int = Field(default=12, ge=1, le=17)

    @field_validator("fixed")
    @classmethod
    def validate_fixed(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, number in value.items():
            if name not in PARAMETER_NAMES:
                raise ValueError(f"Unknown parameter '{name}'.")
            if not math.isfinite(number):
                raise ValueError(f"Fixed value for '{name}' must be finite.")
        return value

    @model_validator(mode="after")
    def validate_names(self) -> "SweepConfig":
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("Axis names must be distinct.")
        overlap = sorted(set(names) & set(self.fixed))
        if overlap:
            raise ValueError(f"Parameters both fixed and swept: {', '.join(overlap)}.")
        return self

    def parameter(self, name: str) -> float:
        return self.fixed.get(name, PARAMETER_DEFAULTS[name])


@dataclass(frozen=True)
class SweepResult:
    """Grid-ordered sweep output; axis 1 is the outer loop.

    ``values`` holds NaN where ``status`` is not "OK"; validity sweeps store 1/0.
    """

    quantity: Quantity
    axis_names: Tuple[str, ...]
    grid: np.ndarray
    values: np.ndarray
    status: Tuple[str, ...]

    @property
    def header(self) -> Tuple[str, ...]:
        return self.axis_names + (self.quantity.value, "status")

    def __len__(self) -> int:
        return len(self.status)
