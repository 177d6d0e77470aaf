"""Gibbs states of the reduced Hamiltonian.

All Boltzmann factors are taken relative to the lowest level (or the largest
exponent for the closed forms), so nothing overflows down to T ~ 1e-4.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..numerics.core import ComplexArray, RealArray, dagger
from ..schemas.params import ModelParams
from ..utilities.errors import PreconditionError
from .model import analytic_eigensystem, eigensystem_arrays

logger = logging.getLogger("spincoding")

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class ThermalState:
    rho: ComplexArray
    log_Z: float
    T: float
    populations: RealArray
    energies: RealArray

    @property
    def Z(self) -> float:
        try:
            return math.exp(self.log_Z)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class GroundState:
    """Ground eigenvector at T = 0.

    ``label`` is the closed-form level (1..4) of the ground energy, or None on
    the numeric branch. ``lam`` is set when psi2 is the ground state and then
    equals |<01|state>|.
    """

    state: ComplexArray
    energy: float
    degenerate: bool
    degenerate_states: Tuple[ComplexArray, ...]
    label: Optional[int]
    lam: Optional[float]


def _require_temperature(p: ModelParams) -> float:
    if p.T is None or not p.T > 0.0:
        raise PreconditionError("Temperature must be positive.", {"T": p.T})
    return p.T


def _log_two_cosh(x: npt.ArrayLike) -> RealArray:
    ax = np.abs(np.asarray(x, dtype=np.float64))
    return ax + np.log1p(np.exp(-2.0 * ax))


def thermal_arrays(
    J: npt.ArrayLike,
    beta0: npt.ArrayLike,
    zeeman: npt.ArrayLike,
    dbzeff: npt.ArrayLike,
    T: npt.ArrayLike,
) -> Tuple[ComplexArray, RealArray, RealArray, RealArray]:
    """(rho, log Z, populations, energies) for broadcast parameter arrays with T > 0."""
    J, beta0, zeeman, dbzeff, T = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.float64) for x in (J, beta0, zeeman, dbzeff, T))
    )
    energies, states, _ = eigensystem_arrays(J, beta0, zeeman, dbzeff)
    lowest = np.min(energies, axis=-1)
    weights = np.exp(-(energies - lowest[..., None]) / T[..., None])
    total = np.sum(weights, axis=-1)
    populations = weights / total[..., None]
    log_z = -lowest / T + np.log(total)

    rho = (states * populations[..., None, :]) @ dagger(states)
    rho = 0.5 * (rho + dagger(rho))
    return rho, log_z, populations, energies


def log_partition_arrays(
    J: npt.ArrayLike,
    beta0: npt.ArrayLike,
    zeeman: npt.ArrayLike,
    dbzeff: npt.ArrayLike,
    T: npt.ArrayLike,
) -> RealArray:
    """log of 2 e^{-J/4T} cosh(gamma_e Bz / T) + 2 e^{J/4T} cosh(sqrt(Jeff) / 2T)."""
    J, beta0, zeeman, dbzeff, T = (np.asarray(x, dtype=np.float64) for x in (J, beta0, zeeman, dbzeff, T))
    root = np.sqrt(J**2 * (1.0 + beta0**2) + dbzeff**2)
    polarised = -J / (4.0 * T) + _log_two_cosh(zeeman / T)
    mixed = J / (4.0 * T) + _log_two_cosh(root / (2.0 * T))
    return np.logaddexp(polarised, mixed)


def log_partition_closed_form(p: ModelParams) -> float:
    T = _require_temperature(p)
    return float(log_partition_arrays(p.J, p.beta0, p.zeeman, p.dBzeff, T))


def thermal_state(p: ModelParams) -> ThermalState:
    T = _require_temperature(p)
    rho, log_z, populations, energies = thermal_arrays(p.J, p.beta0, p.zeeman, p.dBzeff, T)
    return ThermalState(
        rho=rho,
        log_Z=float(log_z),
        T=T,
        populations=populations,
        energies=energies,
    )


def thermal_state_no_dm(p: ModelParams) -> ThermalState:
    """Closed-form Gibbs state for beta0 = 0 and Bz = 0.

    Corners are 1/Z0 with Z0 = 2 + 2 e^{J/2T} cosh(theta), theta = sqrt(Jeff)/2T;
    every entry is scaled by e^{-m}, m = max(0, J/2T + theta), before division.
    """
    T = _require_temperature(p)
    if p.beta0 != 0.0:
        raise PreconditionError("The no-DM closed form needs beta0 = 0.", {"beta0": p.beta0})
    if p.Bz != 0.0:
        raise PreconditionError("The no-DM closed form needs Bz = 0.", {"Bz": p.Bz})

    derived = p.derived()
    root = derived.sqrtJeff
    d = derived.dBzeff
    half = p.J / (2.0 * T)
    theta = root / (2.0 * T)
    m = max(0.0, half + theta)

    up = math.exp(half + theta - m)
    down = math.exp(half - theta - m)
    corner = math.exp(-m)
    z_hat = 2.0 * corner + up + down
    cosh_part = 0.5 * (up + down)
    sinh_part = 0.5 * (up - down)
    d_ratio = d / root if root > 0.0 else 0.0
    j_ratio = p.J / root if root > 0.0 else 0.0

    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = corner / z_hat
    rho[3, 3] = corner / z_hat
    rho[1, 1] = (cosh_part + d_ratio * sinh_part) / z_hat
    rho[2, 2] = (cosh_part - d_ratio * sinh_part) / z_hat
    rho[1, 2] = -j_ratio * sinh_part / z_hat
    rho[2, 1] = rho[1, 2]

    eig = analytic_eigensystem(p)
    shifted = -(eig.energies - eig.energies.min()) / T
    weights = np.exp(shifted)
    # Z = e^{-J/4T} Z0
    return ThermalState(
        rho=rho,
        log_Z=m + math.log(z_hat) - p.J / (4.0 * T),
        T=T,
        populations=weights / weights.sum(),
        energies=eig.energies,
    )


def zero_temperature_state(p: ModelParams) -> GroundState:
    eig = analytic_eigensystem(p)
    order = np.argsort(eig.energies, kind="stable")
    energies = eig.energies[order]
    ground = float(energies[0])
    within = [int(i) for i in order if abs(eig.energies[i] - ground) <= DEGENERACY_TOL * max(1.0, abs(ground))]
    degenerate = len(within) > 1
    if degenerate:
        logger.warning("Ground level is %s-fold degenerate at E = %.6g", len(within), ground)

    index = within[0]
    state = eig.states[:, index]
    label = None if eig.numeric_branch else index + 1
    lam = None
    if label == 2 and not degenerate:
        d = p.dBzeff
        root = math.sqrt(eig.Jeff)
        lam = math.sqrt(0.5 * (1.0 - d / root))
    return GroundState(
        state=state,
        energy=ground,
        degenerate=degenerate,
        degenerate_states=tuple(eig.states[:, i] for i in within),
        label=label,
        lam=lam,
    )


def printed_ground_state(p: ModelParams) -> ComplexArray:
    """The closed-form low-temperature state lambda-parametrised in |10>, |01>.

    Equals i psi2; only meaningful when psi2 is the ground state.
    """
    if p.J == 0.0:
        raise PreconditionError("The closed-form ground state needs J != 0.", {"J": p.J})
    derived = p.derived()
    root = derived.sqrtJeff
    d = derived.dBzeff
    lam = math.sqrt(0.5 * (1.0 - d / root))
    state = np.zeros(4, dtype=np.complex128)
    state[1] = (root + d) * lam * (p.beta0 - 1j) / (p.J * (1.0 + p.beta0**2))
    state[2] = 1j * lam
    return state
