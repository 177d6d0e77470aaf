from __future__ import annotations

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _require_finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError("Value must be finite.")
    return value


class ModelParams(BaseModel):
    """Physical inputs of the two-spin model in natural units (k_B = hbar = 1).

    J > 0 is antiferromagnetic, J < 0 ferromagnetic. ``Bz`` and ``dBz`` are the
    z-components of the mean field and of the half field difference; the
    energies that enter the Hamiltonian are ``gamma_e * Bz`` and
    ``dBzeff = 2 * gamma_e * dBz``.
    """

    model_config = ConfigDict(frozen=True)

    J: float
    beta0: float = 0.0
    gamma_e: float = Field(default=1.0, gt=0.0)
    Bz: float = 0.0
    dBz: float = 0.0
    T: Optional[float] = None

    @field_validator("J", "beta0", "gamma_e", "Bz", "dBz")
    @classmethod
    def validate_finite(cls, value: float) -> float:
        return _require_finite(value)

    @field_validator("T")
    @classmethod
    def validate_temperature(cls, value: Optional[float]) -> Optional[float]:
        if value is None:
            return value
        return _require_finite(value)

    @classmethod
    def from_effective(
        cls,
        J: float,
        beta0: float = 0.0,
        dBzeff: float = 0.0,
        Bz: float = 0.0,
        T: Optional[float] = None,
        gamma_e: float = 1.0,
    ) -> "ModelParams":
        # gamma_e <= 0 is rejected by field validation
        dBz = dBzeff / (2.0 * gamma_e) if gamma_e > 0.0 else 0.0
        return cls(J=J, beta0=beta0, gamma_e=gamma_e, Bz=Bz, dBz=dBz, T=T)

    @property
    def zeeman(self) -> float:
        """gamma_e * Bz."""
        return self.gamma_e * self.Bz

    @property
    def dBzeff(self) -> float:
        return 2.0 * self.gamma_e * self.dBz

    def derived(self) -> "DerivedParams":
        dbzeff = self.dBzeff
        jeff = self.J**2 * (1.0 + self.beta0**2) + dbzeff**2
        return DerivedParams(dBzeff=dbzeff, Jeff=jeff, sqrtJeff=math.sqrt(jeff))


class DerivedParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    dBzeff: float
    Jeff: float = Field(..., ge=0.0)
    sqrtJeff: float = Field(..., ge=0.0)


class FullFieldParams(BaseModel):
    """Transverse field components for the full Hamiltonian."""

    model_config = ConfigDict(frozen=True)

    Bx: float = 0.0
    By: float = 0.0
    dBx: float = 0.0
    dBy: float = 0.0

    @field_validator("Bx", "By", "dBx", "dBy")
    @classmethod
    def validate_finite(cls, value: float) -> float:
        return _require_finite(value)

    @property
    def theta(self) -> complex:
        return complex(self.Bx, self.By)

    @property
    def dtheta(self) -> complex:
        return complex(self.dBx, self.dBy)


class ProductState(BaseModel):
    """(alpha1|1> + beta1|0>) x (alpha2|1> + beta2|0>)."""

    model_config = ConfigDict(frozen=True)

    alpha1: complex
    beta1: complex
    alpha2: complex
    beta2: complex

    @model_validator(mode="after")
    def validate_normalised(self) -> "ProductState":
        for label, (x, y) in (("spin 1", (self.alpha1, self.beta1)), ("spin 2", (self.alpha2, self.beta2))):
            norm = abs(x) ** 2 + abs(y) ** 2
            if not math.isfinite(norm) or abs(norm - 1.0) > 1e-12:
                raise ValueError(f"{label} amplitudes must satisfy |alpha|^2 + |beta|^2 = 1 (got {norm!r}).")
        return self

    @classmethod
    def from_bloch(cls, theta1: float, phi1: float, theta2: float, phi2: float) -> "ProductState":
        return cls(
            alpha1=complex(math.cos(theta1 / 2.0)),
            beta1=complex(math.sin(theta1 / 2.0)) * complex(math.cos(phi1), math.sin(phi1)),
            alpha2=complex(math.cos(theta2 / 2.0)),
            beta2=complex(math.sin(theta2 / 2.0)) * complex(math.cos(phi2), math.sin(phi2)),
        )

    @classmethod
    def from_unnormalised(cls, alpha1: complex, beta1: complex, alpha2: complex, beta2: complex) -> "ProductState":
        n1 = math.sqrt(abs(alpha1) ** 2 + abs(beta1) ** 2)
        n2 = math.sqrt(abs(alpha2) ** 2 + abs(beta2) ** 2)
        if n1 == 0.0 or n2 == 0.0:
            raise ValueError("Each spin needs a nonzero amplitude.")
        return cls(alpha1=alpha1 / n1, beta1=beta1 / n1, alpha2=alpha2 / n2, beta2=beta2 / n2)

    @property
    def spin1(self) -> tuple[complex, complex]:
        return (self.alpha1, self.beta1)

    @property
    def spin2(self) -> tuple[complex, complex]:
        return (self.alpha2, self.beta2)
