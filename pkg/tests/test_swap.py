import math

import numpy as np
import pytest
import scipy.linalg
import scipy.optimize

from spincoding.numerics.core import phase_aligned_distance
from spincoding.physics.model import build_reduced_hamiltonian
from spincoding.physics.swap import (
    CNOT,
    SWAP,
    characteristic_coefficients,
    cnot_from_sqrt_swap,
    evolve,
    evolve_arrays,
    find_swap_times,
    product_vector,
    purity_witness,
    random_product_states,
    reduced_density_spin1,
    sqrt_swap,
    verify_swap,
    witness_closed_form_arrays,
)
from spincoding.schemas.params import ModelParams, ProductState
from spincoding.schemas.reports import CaseLabel, SwapMapping
from spincoding.utilities.errors import PreconditionError

SQRT8 = math.sqrt(8.0)


def _oracle(p: ModelParams, s0: ProductState, t: float) -> np.ndarray:
    return scipy.linalg.expm(-1j * build_reduced_hamiltonian(p) * t) @ product_vector(s0)


def _scan_product_times(p: ModelParams, t_max: float, step: float = 1e-3) -> list:
    """Nonzero times where a handful of random product states all stay product."""
    states = random_product_states(np.random.default_rng(11), 4)
    amps = [np.array([getattr(s, name) for s in states])[:, None] for name in ("alpha1", "beta1", "alpha2", "beta2")]

    def worst_witness(t):
        out = evolve_arrays(p.J, p.beta0, p.zeeman, p.dBzeff, *amps, t)
        return np.max(np.abs(out["a"] * out["d"] - out["b"] * out["c"]) ** 2, axis=0)

    grid = np.arange(step, t_max, step)
    w = worst_witness(grid[None, :])
    minima = np.flatnonzero((w[1:-1] <= w[:-2]) & (w[1:-1] <= w[2:]) & (w[1:-1] < 1e-4)) + 1
    found = []
    for i in minima:
        res = scipy.optimize.minimize_scalar(
            lambda t: float(worst_witness(np.array([[t]]))[0]),
            bounds=(grid[i] - step, grid[i] + step),
            method="bounded",
            options={"xatol": 1e-11},
        )
        if res.fun < 1e-12:
            found.append(float(res.x))
    return found


@pytest.fixture
def state():
    return ProductState.from_unnormalised(0.3 - 0.2j, 0.9, -0.5j, 0.4 + 0.1j)


class TestEvolution:
    @pytest.mark.parametrize(
        "J, beta0, dbzeff, Bz, t",
        [
            (1.0, 0.0, 0.0, 0.0, 1.3),
            (-1.0, 0.8, 0.5, 0.2, 7.9),
            (2.0, SQRT8, 0.0, -0.4, math.pi),
            (0.0, 0.0, 0.7, 0.1, 2.2),
            (0.0, 0.0, 0.0, 0.3, 4.0),
        ],
    )
    def test_closed_form_matches_expm(self, state, J, beta0, dbzeff, Bz, t):
        p = ModelParams.from_effective(J=J, beta0=beta0, dBzeff=dbzeff, Bz=Bz)
        e = evolve(p, state, t)
        assert np.allclose(e.vector, _oracle(p, state, t), atol=1e-12)
        assert e.oracle_path == (J == 0.0 and dbzeff == 0.0)

    def test_batched_evolution_matches_oracle(self, rng):
        size = 500
        J = rng.uniform(-2.0, 2.0, size)
        beta0 = rng.uniform(0.0, 2.0, size)
        zeeman = rng.uniform(-1.0, 1.0, size)
        dbzeff = rng.uniform(-2.0, 2.0, size)
        t = rng.uniform(0.0, 10.0, size)
        states = random_product_states(rng, size)
        amps = [np.array([getattr(s, name) for s in states]) for name in ("alpha1", "beta1", "alpha2", "beta2")]
        out = evolve_arrays(J, beta0, zeeman, dbzeff, *amps, t)
        for i in range(0, size, 25):
            p = ModelParams.from_effective(J=J[i], beta0=beta0[i], dBzeff=dbzeff[i], Bz=zeeman[i])
            expected = _oracle(p, states[i], t[i])
            got = np.array([out["a"][i], out["b"][i], out["c"][i], out["d"][i]])
            assert np.allclose(got, expected, atol=1e-10)

    def test_time_zero_is_identity(self, state):
        e = evolve(ModelParams(J=1.3, beta0=0.4), state, 0.0)
        assert np.allclose(e.vector, product_vector(state), atol=1e-15)

    def test_recurrence_returns_state_up_to_global_phase(self, state):
        # J = 1, sqrt(Jeff) = 2: every level phase e^{-iEt} agrees at t = 4 pi
        p = ModelParams(J=1.0, beta0=math.sqrt(3.0))
        for t in (0.0, 0.9, 5.3):
            here = evolve(p, state, t).vector
            later = evolve(p, state, t + 4.0 * math.pi).vector
            assert phase_aligned_distance(here, later) <= 1e-10

    def test_norm_is_conserved_over_long_times(self, rng):
        states = random_product_states(rng, 16)
        amps = [np.array([getattr(s, name) for s in states])[:, None] for name in ("alpha1", "beta1", "alpha2", "beta2")]
        t = np.linspace(0.0, 100.0, 2001)[None, :]
        out = evolve_arrays(-1.0, 0.8, 0.2, 0.5, *amps, t)
        norms = sum(np.abs(out[key]) ** 2 for key in ("a", "b", "c", "d"))
        assert np.max(np.abs(norms - 1.0)) <= 1e-10

    def test_rejects_infinite_time(self, state):
        with pytest.raises(PreconditionError):
            evolve(ModelParams(J=1.0), state, math.inf)


class TestPurityWitness:
    @pytest.mark.parametrize("t", [0.0, 0.4, 2.0, 11.5])
    def test_closed_form_identity(self, state, t):
        w = purity_witness(ModelParams.from_effective(J=-1.0, beta0=0.8, dBzeff=0.5, Bz=0.3), state, t)
        assert abs(w.value - w.closed_form) <= max(1e-12, 1e-9 * abs(w.value))
        assert w.identity_error == pytest.approx(abs(w.value - w.closed_form))

    def test_witness_is_determinant_of_reduced_state(self, state):
        p = ModelParams.from_effective(J=1.0, beta0=0.3, dBzeff=0.2)
        e = evolve(p, state, 1.7)
        trace, det = characteristic_coefficients(reduced_density_spin1(e))
        w = purity_witness(p, state, 1.7)
        assert trace == pytest.approx(1.0)
        assert det == pytest.approx(w.squared, abs=1e-14)
        assert w.squared > 1e-8

    def test_product_state_at_time_zero(self, state):
        assert purity_witness(ModelParams(J=1.0, beta0=0.5), state, 0.0).squared < 1e-30

    def test_closed_form_vanishes_without_dynamics(self):
        terms = witness_closed_form_arrays(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 3.0)
        assert terms["closed_form"] == 0.0


class TestSwapTimes:
    def test_dm_swap_point(self):
        solutions = find_swap_times(ModelParams(J=1.0, beta0=SQRT8), k_max=4, n_max=4)
        match = [s for s in solutions if (s.k, s.n) == (1, 0) and s.case_label is CaseLabel.CASE_2_2_ODD]
        assert len(match) == 1
        sol = match[0]
        assert sol.t == pytest.approx(math.pi, abs=1e-12)
        assert sol.mapping is SwapMapping.SWAP
        assert sol.witness < 1e-20
        # spin 1 carries -e^{-i theta}, theta = arccos(1/3)
        assert abs(sol.phase_spin1 - (math.pi - math.acos(1.0 / 3.0))) < 1e-8
        assert sol.printed_phase_matches_spin2
        assert not sol.printed_phase_matches_spin1
        assert sol.printed_time == pytest.approx(math.pi)

    def test_time_zero_is_identity(self):
        solutions = find_swap_times(ModelParams(J=1.0, beta0=SQRT8), k_max=4, n_max=4)
        first = solutions[0]
        assert (first.t, first.k, first.n) == (0.0, 0, 0)
        assert first.case_label is CaseLabel.CASE_1_1
        assert first.mapping is SwapMapping.IDENTITY

    def test_solutions_are_sorted_and_non_negative(self):
        solutions = find_swap_times(ModelParams(J=-1.0, beta0=SQRT8), k_max=6, n_max=6)
        keys = [(s.t, s.k, s.n) for s in solutions]
        assert keys == sorted(keys)
        assert all(s.t >= 0.0 for s in solutions)
        assert any(s.mapping is SwapMapping.SWAP for s in solutions)

    def test_isotropic_exchange_swaps_at_pi_over_j(self):
        solutions = find_swap_times(ModelParams(J=1.0), k_max=2, n_max=2)
        match = [s for s in solutions if s.t == pytest.approx(math.pi)]
        assert match and match[0].case_label is CaseLabel.CASE_2_1
        assert match[0].mapping is SwapMapping.SWAP

    def test_nuclear_field_removes_case_two(self):
        solutions = find_swap_times(ModelParams.from_effective(J=1.0, beta0=SQRT8, dBzeff=0.5), k_max=4, n_max=4)
        assert not [s for s in solutions if s.case_label.value.startswith("Case2")]

    def test_case_one_time_formula(self):
        # Jt = 2n pi and sqrt(Jeff) t = 2k pi with J = 1, beta0 = sqrt(3): sqrt(Jeff) = 2
        solutions = find_swap_times(ModelParams(J=1.0, beta0=math.sqrt(3.0)), k_max=4, n_max=2)
        case_one = [s for s in solutions if s.case_label in (CaseLabel.CASE_1_2_EVEN, CaseLabel.CASE_1_2_ODD)]
        assert case_one
        for s in case_one:
            assert s.t == pytest.approx(2.0 * math.pi * math.sqrt((s.k**2 - s.n**2) / 3.0))
            assert s.mapping is SwapMapping.IDENTITY

    def test_no_case_two_when_frequencies_are_even_over_odd(self):
        solutions = find_swap_times(ModelParams(J=1.0, beta0=math.sqrt(3.0)), k_max=40, n_max=6)
        assert solutions
        assert not [s for s in solutions if s.case_label.value.startswith("Case2")]

    @pytest.mark.parametrize("beta0", [math.sqrt(3.0), SQRT8, math.sqrt(24.0)])
    def test_fine_time_scan_finds_nothing_the_solver_misses(self, beta0):
        p = ModelParams(J=1.0, beta0=beta0)
        found = _scan_product_times(p, t_max=4.5 * math.pi)
        assert found
        solver_times = [s.t for s in find_swap_times(p, k_max=40, n_max=2)]
        for t in found:
            assert min(abs(t - s) for s in solver_times) <= 1e-5

    def test_zero_coupling_is_rejected(self):
        with pytest.raises(PreconditionError):
            find_swap_times(ModelParams(J=0.0, beta0=1.0))

    @pytest.mark.parametrize("kwargs", [{"k_max": -1}, {"n_max": -1}, {"tol": 0.0}])
    def test_bad_solver_bounds(self, kwargs):
        with pytest.raises(PreconditionError):
            find_swap_times(ModelParams(J=1.0), **kwargs)


class TestVerifySwap:
    def test_random_states_are_swapped(self):
        p = ModelParams(J=1.0, beta0=SQRT8)
        sol = next(s for s in find_swap_times(p, 4, 4) if (s.k, s.n) == (1, 0))
        report = verify_swap(p, sol, batch=32, seed=7)
        assert report.valid and report.swap_confirmed
        assert report.mapping is SwapMapping.SWAP
        assert report.states_checked == 32
        assert report.max_witness <= 1e-10
        assert max(report.phase_spread_spin1, report.phase_spread_spin2) <= 1e-8
        assert report.phase_spin1 == pytest.approx(sol.phase_spin1, abs=1e-8)

    def test_given_state_is_included(self, state):
        p = ModelParams(J=1.0, beta0=SQRT8)
        sol = next(s for s in find_swap_times(p, 4, 4) if (s.k, s.n) == (1, 0))
        assert verify_swap(p, sol, s0=state, batch=4, seed=1).states_checked == 5

    def test_generic_time_is_rejected(self):
        p = ModelParams(J=1.0, beta0=SQRT8)
        sol = find_swap_times(p, 4, 4)[0].model_copy(update={"t": 0.7})
        report = verify_swap(p, sol, batch=8, seed=3)
        assert not report.valid
        assert report.mapping is SwapMapping.NONE

    @pytest.mark.parametrize(
        "s0, identity_too",
        [
            (ProductState.from_unnormalised(1.0, 0.0, 0.0, 1.0), False),
            (ProductState.from_unnormalised(1.0, 0.0, 1.0, 0.0), True),
            (ProductState.from_unnormalised(0.0, 1.0, 0.0, 1.0), True),
        ],
        ids=["10", "11", "00"],
    )
    def test_basis_states_are_swapped(self, s0, identity_too):
        p = ModelParams(J=1.0, beta0=SQRT8)
        sol = next(s for s in find_swap_times(p, 4, 4) if (s.k, s.n) == (1, 0))
        alone = verify_swap(p, sol, s0=s0, batch=0)
        assert alone.mapping is SwapMapping.SWAP
        assert alone.identity_confirmed is identity_too
        assert alone.phase_spin1 is None and alone.phase_spread_spin1 is None

        report = verify_swap(p, sol, s0=s0, batch=8, seed=2)
        assert report.mapping is SwapMapping.SWAP
        assert report.swap_confirmed is True
        assert report.phase_spin1 == pytest.approx(sol.phase_spin1, abs=1e-8)

    def test_case_one_odd_time_flips_both_spins(self):
        p = ModelParams(J=1.0, beta0=math.sqrt(3.0))
        sol = next(s for s in find_swap_times(p, 4, 2) if (s.k, s.n) == (2, 1))
        assert sol.case_label is CaseLabel.CASE_1_2_ODD
        assert sol.t == pytest.approx(2.0 * math.pi)
        report = verify_swap(p, sol, batch=32, seed=4)
        assert report.mapping is SwapMapping.IDENTITY
        assert abs(abs(report.phase_spin1) - math.pi) <= 1e-8
        assert abs(abs(report.phase_spin2) - math.pi) <= 1e-8
        assert sol.printed_phase_matches_spin1 and sol.printed_phase_matches_spin2

    @pytest.mark.parametrize("J, beta0", [(1.0, SQRT8), (-1.0, SQRT8), (1.0, math.sqrt(24.0))])
    def test_every_case_two_solution_verifies(self, J, beta0):
        p = ModelParams(J=J, beta0=beta0)
        case_two = [
            s
            for s in find_swap_times(p, k_max=30, n_max=5)
            if s.case_label in (CaseLabel.CASE_2_2_EVEN, CaseLabel.CASE_2_2_ODD)
        ]
        assert case_two
        for sol in case_two:
            report = verify_swap(p, sol, batch=32, seed=0)
            assert report.valid
            assert report.mapping is sol.mapping is not SwapMapping.NONE
            assert report.phase_spread_spin1 <= 1e-8 and report.phase_spread_spin2 <= 1e-8

    def test_phase_correction_undoes_measured_phases(self):
        sol = next(s for s in find_swap_times(ModelParams(J=1.0, beta0=SQRT8), 4, 4) if (s.k, s.n) == (1, 0))
        assert sol.phase_correction == (-sol.phase_spin1, -sol.phase_spin2)
        identity = find_swap_times(ModelParams(J=1.0, beta0=SQRT8), 4, 4)[0]
        assert identity.phase_correction == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_seed_makes_batches_reproducible(self, rng):
        first = random_product_states(np.random.default_rng(5), 3)
        second = random_product_states(np.random.default_rng(5), 3)
        assert first == second


class TestGate:
    def test_sqrt_swap_squares_to_swap(self):
        root = sqrt_swap()
        assert np.allclose(root @ root, SWAP, atol=1e-12)

    def test_sequence_is_controlled_phase_and_completes_to_cnot(self):
        gate, report = cnot_from_sqrt_swap()
        assert report.sqrt_swap_squared_error <= 1e-12
        assert report.swap_action_error == 0.0
        assert report.deviation_from_controlled_phase <= 1e-10
        assert report.completed_deviation_from_cnot <= 1e-10
        assert report.deviation_from_cnot > 0.5
        assert phase_aligned_distance(gate, CNOT) == pytest.approx(report.deviation_from_cnot)
        assert np.allclose(gate @ gate.conj().T, np.eye(4), atol=1e-12)
