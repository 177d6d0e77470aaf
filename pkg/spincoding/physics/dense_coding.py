"""Dense coding with the thermal two-spin state as the shared resource.

Spin 1 is encoded with one of four orthogonal unitaries chosen with equal
probability and sent to the receiver, who holds spin 2. Capacities are in bits.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..config.settings import get_settings
from ..numerics.core import (
    ComplexArray,
    RealArray,
    as_square_stack,
    dagger,
    density_spectrum,
    entropy_bits,
    von_neumann_entropy,
)
from ..schemas.params import ModelParams
from ..schemas.reports import CapacityReport, ClosedForm, EncodingPhase
from ..utilities.errors import NumericalValidationError, PreconditionError
from .thermal import thermal_arrays

logger = logging.getLogger("spincoding")

LN2 = math.log(2.0)
LN4 = math.log(4.0)
MISMATCH_WARN = 1e-9
MISMATCH_FAIL = 1e-6

_I2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class EncodingSet:
    """U00, U01, U10, U11 on spin 1 in the (|1>, |0>) basis, each used with probability 1/4."""

    unitaries: Tuple[ComplexArray, ComplexArray, ComplexArray, ComplexArray]
    phase: EncodingPhase
    labels: Tuple[str, str, str, str] = ("00", "01", "10", "11")
    probabilities: Tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)

    def gram(self) -> ComplexArray:
        """tr(U_i^dagger U_j) for all pairs."""
        return np.array([[np.trace(dagger(u) @ v) for v in self.unitaries] for u in self.unitaries])


def encoding_unitaries(phase: Optional[EncodingPhase] = None) -> EncodingSet:
    """Identity, phase flip, bit flip and bit-plus-phase flip.

    The phase applied to |1> is pi by default, giving an orthogonal set. The
    quarter_pi reading keeps e^{i pi/4} and is not orthogonal.
    """
    if phase is None:
        phase = EncodingPhase(get_settings().encoding_phase)
    shift = -1.0 + 0.0j if phase is EncodingPhase.PI else cmath.exp(0.25j * math.pi)

    u00 = _I2.copy()
    u01 = np.array([[shift, 0.0], [0.0, 1.0]], dtype=np.complex128)
    u10 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    u11 = np.array([[0.0, 1.0], [shift, 0.0]], dtype=np.complex128)
    return EncodingSet(unitaries=(u00, u01, u10, u11), phase=phase)


def average_signal_state(
    rho: npt.ArrayLike, encoding: Optional[EncodingSet] = None, validate: bool = True
) -> ComplexArray:
    """(1/4) sum_i (U_i x I) rho (U_i x I)^dagger for a density matrix or a stack."""
    a = as_square_stack(rho)
    if a.shape[-1] != 4:
        raise PreconditionError("Expected a 4x4 density matrix.", {"shape": list(a.shape)})
    if validate:
        density_spectrum(a)
    encoding = encoding or encoding_unitaries()
    total = np.zeros_like(a)
    for weight, u in zip(encoding.probabilities, encoding.unitaries):
        op = np.kron(u, _I2)
        total = total + weight * (op @ a @ dagger(op))
    return total


def _closed_form_general(
    J: RealArray, zeeman: RealArray, root: RealArray, T: RealArray
) -> Tuple[RealArray, RealArray, RealArray]:
    """chi = (Z ln4 + A + B - Z ln Z) / (Z ln2), with every term scaled by e^{-m}.

    Returns (chi, A, B); A and B are unscaled and may be inf.
    """
    j = J / (4.0 * T)
    g = zeeman / T
    h = root / (2.0 * T)
    exponents = np.stack([-j + g, -j - g, j + h, j - h], axis=-1)
    m = np.max(exponents, axis=-1)
    e_up, e_down, e_plus, e_minus = np.moveaxis(np.exp(exponents - m[..., None]), -1, 0)

    z_hat = e_up + e_down + e_plus + e_minus
    a_hat = (J * 0.5 * (e_plus + e_minus) + 2.0 * root * 0.5 * (e_plus - e_minus)) / (2.0 * T)
    b_hat = (-J * 0.5 * (e_up + e_down) + 4.0 * zeeman * 0.5 * (e_up - e_down)) / (2.0 * T)
    chi = (LN4 + (a_hat + b_hat) / z_hat - (m + np.log(z_hat))) / LN2

    with np.errstate(over="ignore", invalid="ignore"):
        scale = np.exp(m)
        return chi, a_hat * scale, b_hat * scale


def _zero_field_terms(J: RealArray, root: RealArray, T: RealArray) -> Dict[str, RealArray]:
    half = J / (2.0 * T)
    theta = root / (2.0 * T)
    m = np.maximum(0.0, half + theta)
    up = np.exp(half + theta - m)
    down = np.exp(half - theta - m)
    corner = np.exp(-m)
    return {
        "m": m,
        "zeta_hat": corner + 0.5 * (up + down),
        "delta_hat": -J * corner + root * 0.5 * (up - down),
        "cosh_hat": 0.5 * (up + down),
        "sinh_hat": 0.5 * (up - down),
    }


def _closed_form_zero_field(J: RealArray, root: RealArray, T: RealArray) -> Tuple[RealArray, RealArray, RealArray]:
    """chi = (2J + 4T ln4 - 4T ln(2 zeta) + 2 delta/zeta) / (4T ln2). Returns (chi, zeta, delta)."""
    terms = _zero_field_terms(J, root, T)
    log_zeta = terms["m"] + np.log(terms["zeta_hat"])
    ratio = terms["delta_hat"] / terms["zeta_hat"]
    chi = (2.0 * J + 4.0 * T * LN4 - 4.0 * T * (LN2 + log_zeta) + 2.0 * ratio) / (4.0 * T * LN2)
    with np.errstate(over="ignore", invalid="ignore"):
        scale = np.exp(terms["m"])
        return chi, terms["zeta_hat"] * scale, terms["delta_hat"] * scale


def validity_arrays(J: npt.ArrayLike, beta0: npt.ArrayLike, dbzeff: npt.ArrayLike, T: npt.ArrayLike) -> npt.NDArray[np.bool_]:
    """e^{J/2T}(J cosh theta + sqrt(Jeff) sinh theta) > 2 zeta T ln(zeta) at Bz = 0."""
    J, beta0, dbzeff, T = np.broadcast_arrays(*(np.asarray(x, dtype=np.float64) for x in (J, beta0, dbzeff, T)))
    root = np.sqrt(J**2 * (1.0 + beta0**2) + dbzeff**2)
    terms = _zero_field_terms(J, root, T)
    lhs = J * terms["cosh_hat"] + root * terms["sinh_hat"]
    rhs = 2.0 * terms["zeta_hat"] * T * (terms["m"] + np.log(terms["zeta_hat"]))
    return lhs > rhs


def capacity_grid(
    J: npt.ArrayLike,
    beta0: npt.ArrayLike,
    zeeman: npt.ArrayLike,
    dbzeff: npt.ArrayLike,
    T: npt.ArrayLike,
    encoding: Optional[EncodingSet] = None,
) -> Dict[str, np.ndarray]:
    """Capacity quantities for broadcast parameter arrays (T > 0 everywhere).

    Keys: chi, S_rho, S_avg, chi_holevo, chi_closed_form, zero_field, log_Z,
    A, B, zeta, delta. ``zeta``/``delta`` are NaN where Bz != 0.
    """
    J, beta0, zeeman, dbzeff, T = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.float64) for x in (J, beta0, zeeman, dbzeff, T))
    )
    if np.any(~(T > 0.0)):
        raise PreconditionError("Temperature must be positive.", {"min_T": float(np.min(T))})

    rho, log_z, populations, _ = thermal_arrays(J, beta0, zeeman, dbzeff, T)
    # the populations are the spectrum of rho
    s_rho = np.asarray(entropy_bits(populations))
    s_avg = np.asarray(von_neumann_entropy(average_signal_state(rho, encoding, validate=False)))

    root = np.sqrt(J**2 * (1.0 + beta0**2) + dbzeff**2)
    chi_general, a_term, b_term = _closed_form_general(J, zeeman, root, T)
    chi_zero, zeta, delta = _closed_form_zero_field(J, root, T)
    zero_field = zeeman == 0.0

    return {
        "chi": 2.0 - s_rho,
        "S_rho": s_rho,
        "S_avg": s_avg,
        "chi_holevo": s_avg - s_rho,
        "chi_closed_form": np.where(zero_field, chi_zero, chi_general),
        "zero_field": zero_field,
        "log_Z": log_z,
        "A": a_term,
        "B": b_term,
        "zeta": np.where(zero_field, zeta, np.nan),
        "delta": np.where(zero_field, delta, np.nan),
    }


def check_closed_form(chi: npt.ArrayLike, chi_closed: npt.ArrayLike) -> RealArray:
    """Absolute mismatch per point; logs near-misses and fails hard past the limit."""
    mismatch = np.abs(np.asarray(chi) - np.asarray(chi_closed))
    worst = float(np.max(mismatch)) if mismatch.size else 0.0
    if worst > MISMATCH_FAIL:
        raise NumericalValidationError(
            "Closed-form capacity disagrees with 2 - S(rho).", {"max_mismatch": worst}
        )
    if worst > MISMATCH_WARN:
        logger.warning("Closed-form capacity mismatch %.3e exceeds %.0e", worst, MISMATCH_WARN)
    return mismatch


def _optional(value: float) -> Optional[float]:
    return None if math.isnan(value) else value


def capacity(p: ModelParams, encoding: Optional[EncodingSet] = None) -> CapacityReport:
    if p.T is None or not p.T > 0.0:
        raise PreconditionError("Temperature must be positive.", {"T": p.T})
    grid = capacity_grid(p.J, p.beta0, p.zeeman, p.dBzeff, p.T, encoding)
    check_closed_form(grid["chi"], grid["chi_closed_form"])

    chi = float(grid["chi"])
    return CapacityReport(
        chi=chi,
        S_rho=float(grid["S_rho"]),
        S_avg=float(grid["S_avg"]),
        chi_holevo=float(grid["chi_holevo"]),
        chi_closed_form=float(grid["chi_closed_form"]),
        closed_form=ClosedForm.ZERO_FIELD if bool(grid["zero_field"]) else ClosedForm.GENERAL_FIELD,
        log_Z=float(grid["log_Z"]),
        A=float(grid["A"]),
        B=float(grid["B"]),
        zeta=_optional(float(grid["zeta"])),
        delta=_optional(float(grid["delta"])),
        valid=chi > 1.0,
    )


def validity(p: ModelParams) -> bool:
    if p.T is None or not p.T > 0.0:
        raise PreconditionError("Temperature must be positive.", {"T": p.T})
    if p.Bz != 0.0:
        raise PreconditionError("The validity inequality holds only for Bz = 0.", {"Bz": p.Bz})
    return bool(validity_arrays(p.J, p.beta0, p.dBzeff, p.T))
