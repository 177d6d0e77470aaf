import math

import numpy as np
import pytest

from spincoding.numerics.core import eig_hermitian, eigvals_hermitian
from spincoding.physics.model import (
    analytic_eigensystem,
    build_full_hamiltonian,
    build_reduced_hamiltonian,
    eigensystem_arrays,
    reduced_hamiltonian_array,
    spectrum_comparison,
)
from spincoding.schemas.params import FullFieldParams, ModelParams


def _draws(rng, size):
    J = rng.uniform(-2.0, 2.0, size)
    return J, rng.uniform(0.0, 2.0, size), rng.uniform(-1.0, 1.0, size), rng.uniform(-2.0, 2.0, size)


def test_reduced_hamiltonian_layout():
    p = ModelParams.from_effective(J=1.0, beta0=0.5, dBzeff=0.4, Bz=0.2)
    h = build_reduced_hamiltonian(p)
    expected = np.array(
        [
            [0.25 - 0.2, 0, 0, 0],
            [0, -0.25 - 0.2, 0.5 * (1 + 0.5j), 0],
            [0, 0.5 * (1 - 0.5j), -0.25 + 0.2, 0],
            [0, 0, 0, 0.25 + 0.2],
        ]
    )
    assert np.allclose(h, expected, atol=1e-15)
    assert np.allclose(h, h.conj().T)


def test_heisenberg_singlet_is_ground():
    eig = analytic_eigensystem(ModelParams(J=1.0))
    assert np.allclose(eig.energies, [0.25, -0.75, 0.25, 0.25])
    singlet = np.array([0.0, -1.0, 1.0, 0.0]) / math.sqrt(2.0)
    assert np.allclose(eig.psi(2), singlet)
    assert eig.E2 == pytest.approx(-0.75)
    assert not eig.numeric_branch


def test_analytic_energies_match_jacobi(rng):
    J, beta0, zeeman, dbzeff = _draws(rng, 2000)
    energies, _, numeric = eigensystem_arrays(J, beta0, zeeman, dbzeff)
    oracle = eigvals_hermitian(reduced_hamiltonian_array(J, beta0, zeeman, dbzeff))
    assert not numeric.any()
    assert np.allclose(np.sort(energies, axis=-1), oracle, atol=1e-9, rtol=0)


def test_analytic_states_are_eigenvectors(rng):
    J, beta0, zeeman, dbzeff = _draws(rng, 2000)
    energies, states, _ = eigensystem_arrays(J, beta0, zeeman, dbzeff)
    h = reduced_hamiltonian_array(J, beta0, zeeman, dbzeff)
    assert np.allclose(h @ states, states * energies[:, None, :], atol=1e-10)
    gram = np.conj(np.swapaxes(states, -1, -2)) @ states
    assert np.allclose(gram, np.broadcast_to(np.eye(4), gram.shape), atol=1e-12)


@pytest.mark.parametrize("dbzeff", [-1e6, -3.0, -1e-9, 0.0, 1e-9, 3.0, 1e6])
def test_eigenvectors_stay_normalised_for_extreme_fields(dbzeff):
    energies, states, _ = eigensystem_arrays(0.7, 0.3, 0.0, dbzeff)
    norms = np.linalg.norm(states, axis=0)
    assert np.allclose(norms, 1.0, atol=1e-12)
    h = reduced_hamiltonian_array(0.7, 0.3, 0.0, dbzeff)
    assert np.allclose(h @ states, states * energies, atol=1e-9 * max(1.0, abs(dbzeff)))


def test_eta_and_xi_parameters():
    p = ModelParams.from_effective(J=-1.0, beta0=0.8, dBzeff=0.5)
    eig = analytic_eigensystem(p)
    root = math.sqrt(1.64 + 0.25)
    assert eig.Jeff == pytest.approx(1.89)
    assert eig.eta_plus == pytest.approx(-0.5 + root)
    assert eig.eta_minus == pytest.approx(-0.5 - root)
    assert eig.xi_plus == pytest.approx(1.0 + (root + 0.5) ** 2 / 1.64)
    assert eig.xi_minus == pytest.approx(1.0 + (root - 0.5) ** 2 / 1.64)


def test_zero_coupling_uses_numeric_branch():
    eig = analytic_eigensystem(ModelParams.from_effective(J=0.0, dBzeff=0.6, Bz=0.1))
    assert eig.numeric_branch
    assert math.isnan(eig.xi_plus)
    h = build_reduced_hamiltonian(ModelParams.from_effective(J=0.0, dBzeff=0.6, Bz=0.1))
    assert np.allclose(h @ eig.states, eig.states * eig.energies, atol=1e-12)


def test_full_hamiltonian_reduces_without_transverse_fields():
    p = ModelParams.from_effective(J=-1.3, beta0=0.7, dBzeff=0.9, Bz=0.4, gamma_e=2.0)
    full = build_full_hamiltonian(p, FullFieldParams())
    assert np.allclose(full, build_reduced_hamiltonian(p), atol=1e-15)


def test_transverse_fields_only_shift_levels_slightly():
    p = ModelParams.from_effective(J=1.0, beta0=0.2, dBzeff=0.1, Bz=10.0)
    full, reduced, gap = spectrum_comparison(p, FullFieldParams(dBx=0.05, dBy=-0.03))
    assert np.allclose(full, eig_hermitian(build_full_hamiltonian(p, FullFieldParams(dBx=0.05, dBy=-0.03)))[0])
    assert 0.0 < gap < 1e-3
    assert reduced.shape == (4,)


def test_params_reject_non_finite_values():
    with pytest.raises(ValueError):
        ModelParams(J=math.inf)
    with pytest.raises(ValueError):
        ModelParams(J=1.0, gamma_e=0.0)


def test_effective_field_round_trip():
    p = ModelParams.from_effective(J=1.0, dBzeff=0.5, gamma_e=2.0)
    assert p.dBz == pytest.approx(0.125)
    assert p.dBzeff == pytest.approx(0.5)
    assert p.derived().sqrtJeff == pytest.approx(math.sqrt(1.25))
