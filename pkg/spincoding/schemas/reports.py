from __future__ import annotations

from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class EncodingPhase(str, Enum):
    PI = "pi"
    QUARTER_PI = "quarter_pi"


class CaseLabel(str, Enum):
    CASE_1_1 = "Case1.1"
    CASE_1_2_EVEN = "Case1.2-even"
    CASE_1_2_ODD = "Case1.2-odd"
    CASE_2_1 = "Case2.1"
    CASE_2_2_EVEN = "Case2.2-even"
    CASE_2_2_ODD = "Case2.2-odd"


class SwapMapping(str, Enum):
    SWAP = "swap"
    IDENTITY = "identity"
    NONE = "none"


class ClosedForm(str, Enum):
    GENERAL_FIELD = "eq11"
    ZERO_FIELD = "eq12"


class CapacityReport(BaseModel):
    """Dense-coding capacity of the thermal state, in bits.

    ``chi`` is 2 - S(rho). ``chi_holevo`` is S(rho_avg) - S(rho) for the literal
    average over the encoding set; the two coincide when B_z = 0 and
    dBzeff = 0. ``A``, ``B``, ``zeta`` and ``delta`` can overflow to inf at
    very low T; ``chi_closed_form`` is evaluated in rescaled form and stays
    finite.
    """

    model_config = ConfigDict(frozen=True)

    chi: float
    S_rho: float
    S_avg: float
    chi_holevo: float
    chi_closed_form: float
    closed_form: ClosedForm
    log_Z: float
    A: float
    B: float
    zeta: Optional[float] = None
    delta: Optional[float] = None
    valid: bool


class SwapSolution(BaseModel):
    """A time at which the product-state condition holds for integers (k, n).

    Phases are measured from evolution of a fixed reference state: the factor of
    spin 1 is (target_alpha, e^{i phase_spin1} target_beta), where the target is
    spin 2's initial state for a swap and spin 1's own for an identity map.
    """

    model_config = ConfigDict(frozen=True)

    t: float = Field(..., ge=0.0)
    k: int = Field(..., ge=0)
    n: int
    case_label: CaseLabel
    mapping: SwapMapping
    residuals: Dict[str, float]
    witness: float = Field(..., ge=0.0)
    phase_spin1: Optional[float] = None
    phase_spin2: Optional[float] = None
    printed_phase: Optional[float] = None
    printed_phase_matches_spin1: Optional[bool] = None
    printed_phase_matches_spin2: Optional[bool] = None
    printed_time: Optional[float] = None
    printed_time_residual: Optional[float] = None

    @property
    def phase_correction(self) -> tuple[Optional[float], Optional[float]]:
        """Single-spin z rotations that undo the acquired phases."""
        return (
            None if self.phase_spin1 is None else -self.phase_spin1,
            None if self.phase_spin2 is None else -self.phase_spin2,
        )


class SwapReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    mapping: SwapMapping
    states_checked: int = Field(..., ge=1)
    max_witness: float = Field(..., ge=0.0)
    max_reconstruction_error: float = Field(..., ge=0.0)
    max_amplitude_error: float = Field(..., ge=0.0)
    phase_spin1: Optional[float] = None
    phase_spin2: Optional[float] = None
    phase_spread_spin1: Optional[float] = None
    phase_spread_spin2: Optional[float] = None
    swap_confirmed: bool
    identity_confirmed: bool
    valid: bool


class GateReport(BaseModel):
    """Deviations (max-norm, after global-phase alignment) of the sqrt-swap gate sequence."""

    model_config = ConfigDict(frozen=True)

    sqrt_swap_squared_error: float
    swap_action_error: float
    deviation_from_cnot: float
    deviation_from_controlled_phase: float
    completed_deviation_from_cnot: float


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    detail: str = ""
