"""Hamiltonians of two exchange-coupled spins and their analytic eigensystem.

Basis order is |11>, |10>, |01>, |00> with |1> = spin up. The reduced
Hamiltonian keeps only z fields, which is accurate when the external field
along z dominates the nuclear fields (B_ext,z ~ 100 mT against B_n ~ 1-5 mT):
transverse terms then only shift levels by O(B_n^2 / B_z).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import numpy.typing as npt

from ..numerics.core import ComplexArray, RealArray, eig_hermitian
from ..schemas.params import FullFieldParams, ModelParams

logger = logging.getLogger("spincoding")

_SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=np.complex128)
_SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=np.complex128)
_SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=np.complex128)
_I2 = np.eye(2, dtype=np.complex128)


def _on_spin1(op: ComplexArray) -> ComplexArray:
    return np.kron(op, _I2)


def _on_spin2(op: ComplexArray) -> ComplexArray:
    return np.kron(_I2, op)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of the reduced Hamiltonian.

    ``states[:, l]`` is the eigenvector with energy ``energies[l]``. On the
    analytic branch the columns are psi1..psi4 in the closed-form order; on the
    numeric branch (J = 0) they come from the Jacobi solver in ascending order.
    """

    energies: RealArray
    states: ComplexArray
    eta_plus: float
    eta_minus: float
    xi_plus: float
    xi_minus: float
    Jeff: float
    numeric_branch: bool

    @property
    def E1(self) -> float:
        return float(self.energies[0])

    @property
    def E2(self) -> float:
        return float(self.energies[1])

    @property
    def E3(self) -> float:
        return float(self.energies[2])

    @property
    def E4(self) -> float:
        return float(self.energies[3])

    def psi(self, index: int) -> ComplexArray:
        """Eigenvector psi_index, 1-based like E1..E4."""
        return self.states[:, index - 1]


def build_reduced_hamiltonian(p: ModelParams) -> ComplexArray:
    return reduced_hamiltonian_array(p.J, p.beta0, p.zeeman, p.dBzeff)


def reduced_hamiltonian_array(
    J: npt.ArrayLike,
    beta0: npt.ArrayLike,
    zeeman: npt.ArrayLike,
    dbzeff: npt.ArrayLike,
) -> ComplexArray:
    """Reduced Hamiltonian for broadcast arrays of (J, beta0, gamma_e*Bz, dBzeff)."""
    J, beta0, zeeman, dbzeff = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.float64) for x in (J, beta0, zeeman, dbzeff))
    )
    h = np.zeros(J.shape + (4, 4), dtype=np.complex128)
    h[..., 0, 0] = J / 4.0 - zeeman
    h[..., 1, 1] = -J / 4.0 - dbzeff / 2.0
    h[..., 2, 2] = -J / 4.0 + dbzeff / 2.0
    h[..., 3, 3] = J / 4.0 + zeeman
    h[..., 1, 2] = (J / 2.0) * (1.0 + 1j * beta0)
    h[..., 2, 1] = (J / 2.0) * (1.0 - 1j * beta0)
    return h


def build_full_hamiltonian(p: ModelParams, f: FullFieldParams) -> ComplexArray:
    """H = J[S1.S2 + beta0 (S1 x S2)_z] - gamma_e[B.(S1 + S2) + dB.(S1 - S2)].

    Written from spin operators with the sign convention of the reduced
    Hamiltonian, so zero transverse fields reproduce it exactly.
    """
    exchange = sum(_on_spin1(s) @ _on_spin2(s) for s in (_SX, _SY, _SZ))
    dm = _on_spin1(_SX) @ _on_spin2(_SY) - _on_spin1(_SY) @ _on_spin2(_SX)

    mean_field = (f.Bx, f.By, p.Bz)
    half_difference = (f.dBx, f.dBy, p.dBz)
    zeeman = np.zeros((4, 4), dtype=np.complex128)
    for op, b, db in zip((_SX, _SY, _SZ), mean_field, half_difference):
        zeeman += (b + db) * _on_spin1(op) + (b - db) * _on_spin2(op)

    h = p.J * (exchange + p.beta0 * dm) - p.gamma_e * zeeman
    return 0.5 * (h + h.conj().T)


def spectrum_comparison(p: ModelParams, f: FullFieldParams) -> Tuple[RealArray, RealArray, float]:
    """Sorted spectra of the full and the reduced Hamiltonian and their max gap."""
    full = eig_hermitian(build_full_hamiltonian(p, f))[0]
    reduced = eig_hermitian(build_reduced_hamiltonian(p))[0]
    return full, reduced, float(np.max(np.abs(full - reduced)))


def _stable_offsets(root: RealArray, dbzeff: RealArray, coupling: RealArray) -> Tuple[RealArray, RealArray]:
    """(sqrt(Jeff) + dBzeff, sqrt(Jeff) - dBzeff) without cancellation."""
    total = root + np.abs(dbzeff)
    small = np.divide(coupling, total, out=np.zeros_like(total), where=total > 0.0)
    plus = np.where(dbzeff >= 0.0, total, small)
    minus = np.where(dbzeff >= 0.0, small, total)
    return plus, minus


def eigensystem_arrays(
    J: npt.ArrayLike,
    beta0: npt.ArrayLike,
    zeeman: npt.ArrayLike,
    dbzeff: npt.ArrayLike,
) -> Tuple[RealArray, ComplexArray, npt.NDArray[np.bool_]]:
    """Energies (..., 4), eigenvector columns (..., 4, 4) and the numeric-branch mask.

    Entries with J = 0 have no closed-form psi2/psi3 and are solved with the
    Jacobi eigensolver instead.
    """
    J, beta0, zeeman, dbzeff = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.float64) for x in (J, beta0, zeeman, dbzeff))
    )
    coupling = J**2 * (1.0 + beta0**2)
    root = np.sqrt(coupling + dbzeff**2)
    numeric = coupling == 0.0
    safe_coupling = np.where(numeric, 1.0, coupling)

    plus, minus = _stable_offsets(root, dbzeff, coupling)
    xi_plus = 1.0 + plus**2 / safe_coupling
    xi_minus = 1.0 + minus**2 / safe_coupling
    dm = np.where(numeric, 1.0, J) * (1.0 - 1j * beta0)

    energies = np.empty(J.shape + (4,), dtype=np.float64)
    energies[..., 0] = J / 4.0 - zeeman
    energies[..., 1] = -J / 4.0 - root / 2.0
    energies[..., 2] = -J / 4.0 + root / 2.0
    energies[..., 3] = J / 4.0 + zeeman

    states = np.zeros(J.shape + (4, 4), dtype=np.complex128)
    states[..., 0, 0] = 1.0
    states[..., 3, 3] = 1.0
    # psi2 pairs eta_minus with xi_plus, psi3 pairs eta_plus with xi_minus
    states[..., 1, 1] = (-plus / dm) / np.sqrt(xi_plus)
    states[..., 2, 1] = 1.0 / np.sqrt(xi_plus)
    states[..., 1, 2] = (minus / dm) / np.sqrt(xi_minus)
    states[..., 2, 2] = 1.0 / np.sqrt(xi_minus)

    if np.any(numeric):
        h = reduced_hamiltonian_array(J[numeric], beta0[numeric], zeeman[numeric], dbzeff[numeric])
        w, v = eig_hermitian(h)
        energies[numeric] = w
        states[numeric] = v
    return energies, states, numeric


def analytic_eigensystem(p: ModelParams) -> EigenSystem:
    energies, states, numeric = eigensystem_arrays(p.J, p.beta0, p.zeeman, p.dBzeff)
    derived = p.derived()
    if bool(numeric):
        logger.warning("J = 0: closed-form eigenvectors are singular, using the numeric branch")
        nan = math.nan
        return EigenSystem(
            energies=energies,
            states=states,
            eta_plus=nan,
            eta_minus=nan,
            xi_plus=nan,
            xi_minus=nan,
            Jeff=derived.Jeff,
            numeric_branch=True,
        )

    coupling = p.J**2 * (1.0 + p.beta0**2)
    root = derived.sqrtJeff
    return EigenSystem(
        energies=energies,
        states=states,
        eta_plus=-derived.dBzeff + root,
        eta_minus=-derived.dBzeff - root,
        xi_plus=1.0 + (root + derived.dBzeff) ** 2 / coupling,
        xi_minus=1.0 + (root - derived.dBzeff) ** 2 / coupling,
        Jeff=derived.Jeff,
        numeric_branch=False,
    )
