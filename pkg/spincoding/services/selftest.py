"""Cross-checks of the closed forms against brute-force numerics.

Each check returns a CheckResult; the CLI prints them and exits 2 if any fail.
"""
from __future__ import annotations

import hashlib
import logging
import math
from typing import Callable, Dict, List

import numpy as np

from ..config.settings import Settings
from ..numerics.core import eig_hermitian, expm_i, hermitian_function, partial_trace_second, von_neumann_entropy
from ..physics.dense_coding import average_signal_state, capacity_grid, validity_arrays
from ..physics.model import eigensystem_arrays, reduced_hamiltonian_array
from ..physics.swap import cnot_from_sqrt_swap, evolve_arrays, find_swap_times, verify_swap, witness_closed_form_arrays
from ..physics.thermal import thermal_arrays
from ..schemas.params import ModelParams
from ..schemas.reports import CaseLabel, CheckResult, SwapMapping
from ..schemas.sweep import Quantity, SweepAxis, SweepConfig
from .sweep_service import SweepService


def _draw_parameters(rng: np.random.Generator, size: int) -> Dict[str, np.ndarray]:
    J = rng.uniform(-2.0, 2.0, size)
    J[J == 0.0] = 1.0
    return {
        "J": J,
        "beta0": rng.uniform(0.0, 2.0, size),
        "zeeman": rng.uniform(-1.0, 1.0, size),
        "dbzeff": rng.uniform(-2.0, 2.0, size),
    }


def _capacity_chi(J, beta0, dbzeff, T) -> np.ndarray:
    return capacity_grid(J, beta0, 0.0, dbzeff, T)["chi"]


class SelfTestService:
    def __init__(self, settings: Settings, quick: bool = False) -> None:
        self._settings = settings
        self._quick = quick
        self._rng = np.random.default_rng(settings.verify_seed)
        self._logger = logging.getLogger("spincoding")

    def _size(self, full: int, quick: int) -> int:
        return quick if self._quick else full

    def check_eigensystem(self) -> CheckResult:
        draws = _draw_parameters(self._rng, self._size(10_000, 500))
        energies, _, _ = eigensystem_arrays(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"])
        oracle = eig_hermitian(reduced_hamiltonian_array(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"]))[0]
        error = float(np.max(np.abs(np.sort(energies, axis=-1) - oracle)))
        return CheckResult(name="eigensystem", passed=error <= 1e-9, detail=f"max |dE| = {error:.3e}")

    def check_gibbs(self) -> CheckResult:
        size = self._size(1_000, 200)
        draws = _draw_parameters(self._rng, size)
        T = np.exp(self._rng.uniform(math.log(0.01), math.log(5.0), size))
        T[0] = 0.01
        rho = thermal_arrays(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"], T)[0]
        h = reduced_hamiltonian_array(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"])
        unnormalised = hermitian_function(h, lambda w: np.exp(-(w - w.min(axis=-1, keepdims=True)) / T[:, None]))
        oracle = unnormalised / np.real(np.trace(unnormalised, axis1=-2, axis2=-1))[:, None, None]
        error = float(np.max(np.abs(rho - oracle)))
        s_rho = capacity_grid(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"], T)["S_rho"]
        entropy_error = float(np.max(np.abs(s_rho - von_neumann_entropy(oracle))))
        return CheckResult(
            name="gibbs_state",
            passed=error <= 1e-10 and entropy_error <= 1e-10,
            detail=f"max |drho| = {error:.3e}; max |dS| against the eigensolver = {entropy_error:.3e}",
        )

    def check_average_state(self) -> CheckResult:
        size = self._size(1_000, 200)
        draws = _draw_parameters(self._rng, size)
        T = self._rng.uniform(0.05, 2.0, size)
        unpolarised = thermal_arrays(draws["J"], draws["beta0"], 0.0, 0.0, T)[0]
        flat_error = float(np.max(np.abs(average_signal_state(unpolarised) - np.eye(4) / 4.0)))

        rho = thermal_arrays(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"], T)[0]
        expected = np.einsum("ij,...kl->...ikjl", np.eye(2) / 2.0, partial_trace_second(rho)).reshape(size, 4, 4)
        frame_error = float(np.max(np.abs(average_signal_state(rho) - expected)))
        return CheckResult(
            name="average_signal_state",
            passed=flat_error <= 1e-12 and frame_error <= 1e-12,
            detail=f"I/4 at Bz = dBzeff = 0: {flat_error:.3e}; (I/2) x rho2 in general: {frame_error:.3e}",
        )

    def check_limits(self) -> CheckResult:
        cold = float(_capacity_chi(1.0, 0.0, 0.0, 0.001))
        large_dm = _capacity_chi(np.array([1.0, -1.0]), 1e3, 0.0, 0.05)
        passed = abs(cold - 2.0) <= 1e-3 and bool(np.all(large_dm >= 1.999))
        return CheckResult(
            name="capacity_limits",
            passed=passed,
            detail=f"chi(T=0.001) = {cold:.12g}; chi(beta0=1e3, J=+-1) = {large_dm.min():.12g}",
        )

    def check_closed_forms(self) -> CheckResult:
        size = self._size(2_000, 300)
        draws = _draw_parameters(self._rng, size)
        T = np.exp(self._rng.uniform(math.log(0.01), math.log(5.0), size))
        zero_field = np.arange(size) % 2 == 0
        zeeman = np.where(zero_field, 0.0, draws["zeeman"])
        grid = capacity_grid(draws["J"], draws["beta0"], zeeman, draws["dbzeff"], T)
        mismatch = float(np.max(np.abs(grid["chi"] - grid["chi_closed_form"])))

        predicate = validity_arrays(draws["J"][zero_field], draws["beta0"][zero_field], draws["dbzeff"][zero_field], T[zero_field])
        disagreements = int(np.sum(predicate != (grid["chi"][zero_field] > 1.0)))

        crossing_gap = self._crossing_gap()
        passed = mismatch <= 1e-9 and disagreements == 0 and crossing_gap <= 1e-9
        return CheckResult(
            name="closed_forms",
            passed=passed,
            detail=(
                f"max |chi - closed form| = {mismatch:.3e}; predicate disagreements = {disagreements}; "
                f"max crossing gap in T = {crossing_gap:.3e}"
            ),
        )

    def _crossing_gap(self) -> float:
        """Largest distance between the T where chi crosses 1 and the T where the predicate flips."""
        count = 50
        J = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
        beta0 = self._rng.uniform(0.5, 2.0, count)
        dbzeff = self._rng.uniform(-2.0, 2.0, count)
        lo = np.full(count, 0.01)
        hi = np.full(count, 5.0)
        bracketed = (_capacity_chi(J, beta0, dbzeff, lo) > 1.0) & (_capacity_chi(J, beta0, dbzeff, hi) < 1.0)
        J, beta0, dbzeff = J[bracketed], beta0[bracketed], dbzeff[bracketed]
        if J.size == 0:
            return math.inf

        chi_lo, chi_hi = lo[bracketed].copy(), hi[bracketed].copy()
        pred_lo, pred_hi = chi_lo.copy(), chi_hi.copy()
        for _ in range(60):
            mid = 0.5 * (chi_lo + chi_hi)
            above = _capacity_chi(J, beta0, dbzeff, mid) > 1.0
            chi_lo, chi_hi = np.where(above, mid, chi_lo), np.where(above, chi_hi, mid)
            mid = 0.5 * (pred_lo + pred_hi)
            holds = validity_arrays(J, beta0, dbzeff, mid)
            pred_lo, pred_hi = np.where(holds, mid, pred_lo), np.where(holds, pred_hi, mid)
        return float(np.max(np.abs(chi_lo - pred_lo)))

    def check_symmetries(self) -> CheckResult:
        dbzeff = np.linspace(0.0, 2.0, 41)
        chi_plus = capacity_grid(1.0, 0.01, 0.0, dbzeff, 0.05)
        chi_minus = capacity_grid(1.0, 0.01, 0.0, -dbzeff, 0.05)
        mirror = float(np.max(np.abs(chi_plus["chi"] - chi_minus["chi"])))
        mirror_exact = bool(np.array_equal(chi_plus["chi"], chi_minus["chi"]))
        mirror_closed = bool(np.array_equal(chi_plus["chi_closed_form"], chi_minus["chi_closed_form"]))

        a = self._rng.uniform(0.0, 2.0, 40)
        b = self._rng.uniform(0.0, 2.0, 40)
        J = np.where(np.arange(40) % 2 == 0, 1.0, -1.0)
        exchange = float(np.max(np.abs(_capacity_chi(J, a, b, 0.05) - _capacity_chi(J, b, a, 0.05))))

        slice_field = np.linspace(0.0, 1.0, 51)
        coupling_order = float(np.min(_capacity_chi(1.0, 0.01, slice_field, 0.05) - _capacity_chi(-1.0, 0.01, slice_field, 0.05)))

        T = np.linspace(0.01, 5.0, 200)
        rising = 0.0
        for coupling in (-1.0, 1.0):
            for field in (0.5, 1.2):
                chi = _capacity_chi(coupling, 0.01, field, T)
                rising = max(rising, float(np.max(np.diff(chi))))

        beta0 = np.linspace(0.0, 20.0, 401)
        falling = 0.0
        for coupling in (-1.0, 1.0):
            chi = _capacity_chi(coupling, beta0, 0.0, 0.05)
            falling = max(falling, float(-np.min(np.diff(chi))))

        passed = (
            mirror_exact
            and mirror_closed
            and exchange <= 1e-10
            and rising <= 1e-12
            and falling <= 1e-12
            and coupling_order >= 0.0
        )
        return CheckResult(
            name="symmetries",
            passed=passed,
            detail=(
                f"dBzeff mirror {mirror:.3e} (closed form exact: {mirror_closed}); "
                f"beta0/dBzeff exchange {exchange:.3e}; largest rise in T {rising:.3e}; "
                f"largest fall in beta0 on [0, 20] {falling:.3e}; "
                f"min chi(J=1) - chi(J=-1) at T=0.05 {coupling_order:.3e}"
            ),
        )

    def check_evolution(self) -> CheckResult:
        size = self._size(10_000, 500)
        draws = _draw_parameters(self._rng, size)
        t = self._rng.uniform(0.0, 10.0, size)
        raw = self._rng.standard_normal((size, 8))
        spin1 = (raw[:, 0] + 1j * raw[:, 1], raw[:, 2] + 1j * raw[:, 3])
        spin2 = (raw[:, 4] + 1j * raw[:, 5], raw[:, 6] + 1j * raw[:, 7])
        n1 = np.sqrt(np.abs(spin1[0]) ** 2 + np.abs(spin1[1]) ** 2)
        n2 = np.sqrt(np.abs(spin2[0]) ** 2 + np.abs(spin2[1]) ** 2)
        alpha1, beta1 = spin1[0] / n1, spin1[1] / n1
        alpha2, beta2 = spin2[0] / n2, spin2[1] / n2

        out = evolve_arrays(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"], alpha1, beta1, alpha2, beta2, t)
        analytic = np.stack([out["a"], out["b"], out["c"], out["d"]], axis=-1)
        h = reduced_hamiltonian_array(draws["J"], draws["beta0"], draws["zeeman"], draws["dbzeff"])
        psi0 = np.stack([alpha1 * alpha2, alpha1 * beta2, beta1 * alpha2, beta1 * beta2], axis=-1)
        oracle = np.einsum("nij,nj->ni", expm_i(h, t), psi0)
        error = float(np.max(np.abs(analytic - oracle)))

        value = out["a"] * out["d"] - out["b"] * out["c"]
        closed = witness_closed_form_arrays(draws["J"], draws["beta0"], draws["dbzeff"], alpha1, beta1, alpha2, beta2, t)
        gap = np.abs(value - closed["closed_form"])
        witness_ok = bool(np.all(gap <= np.maximum(1e-12, 1e-9 * np.abs(value))))
        return CheckResult(
            name="evolution",
            passed=error <= 1e-10 and witness_ok,
            detail=f"max |psi - oracle| = {error:.3e}; max witness identity gap = {float(gap.max()):.3e}",
        )

    def check_swap(self) -> CheckResult:
        p = ModelParams(J=1.0, beta0=math.sqrt(8.0))
        solutions = find_swap_times(p, k_max=4, n_max=4, tol=self._settings.solver_tol)
        target = [s for s in solutions if s.k == 1 and s.n == 0 and s.case_label is CaseLabel.CASE_2_2_ODD]
        if not target or abs(target[0].t - math.pi) > 1e-12:
            return CheckResult(name="swap", passed=False, detail="(k=1, n=0, t=pi) solution missing")

        report = verify_swap(p, target[0], batch=32, seed=self._settings.verify_seed)
        if report.mapping is not SwapMapping.SWAP or report.phase_spin1 is None:
            return CheckResult(name="swap", passed=False, detail=f"t=pi realises {report.mapping.value}, not a swap")
        theta = math.acos(1.0 / 3.0)
        magnitude = abs(abs(float(np.angle(np.exp(1j * (report.phase_spin1 - math.pi))))) - theta)

        polarised = find_swap_times(ModelParams.from_effective(J=1.0, beta0=math.sqrt(8.0), dBzeff=0.5), 4, 4)
        case_two = [s for s in polarised if s.case_label.value.startswith("Case2")]

        passed = (
            report.max_witness <= 1e-10
            and max(report.phase_spread_spin1 or 0.0, report.phase_spread_spin2 or 0.0) <= 1e-8
            and magnitude <= 1e-8
            and not case_two
        )
        return CheckResult(
            name="swap",
            passed=passed,
            detail=(
                f"mapping {report.mapping.value}; spin-1 phase {report.phase_spin1:.12g}, "
                f"spin-2 phase {report.phase_spin2:.12g}; printed phase matches spin 2: "
                f"{target[0].printed_phase_matches_spin2}; Case 2 at dBzeff=0.5: {len(case_two)}"
            ),
        )

    def check_gate(self) -> CheckResult:
        _, report = cnot_from_sqrt_swap()
        passed = report.sqrt_swap_squared_error <= 1e-12 and report.completed_deviation_from_cnot <= 1e-12
        return CheckResult(
            name="sqrt_swap_gate",
            passed=passed,
            detail=(
                f"sqrt-swap squared error {report.sqrt_swap_squared_error:.3e}; literal sequence is "
                f"{report.deviation_from_cnot:.3g} from CNOT and {report.deviation_from_controlled_phase:.3e} from "
                f"the controlled-phase gate; with target Hadamards {report.completed_deviation_from_cnot:.3e}"
            ),
        )

    def check_determinism(self) -> CheckResult:
        count = self._size(101, 21)
        cfg = SweepConfig(
            quantity=Quantity.CHI,
            fixed={"T": 0.05, "beta0": 0.01},
            axes=[
                SweepAxis(name="J", start=-2.0, stop=2.0, count=count),
                SweepAxis(name="dBzeff", start=-2.0, stop=2.0, count=count),
            ],
        )
        service = SweepService(self._settings)
        digests = [
            hashlib.sha256(service.run_sweep(cfg, workers=workers)[1].encode("utf-8")).hexdigest()
            for workers in (1, 1, 2)
        ]
        return CheckResult(
            name="sweep_determinism",
            passed=len(set(digests)) == 1,
            detail=f"sha256 {digests[0][:16]} over {count}x{count} points, serial twice and two workers",
        )

    def run(self) -> List[CheckResult]:
        checks: List[Callable[[], CheckResult]] = [
            self.check_eigensystem,
            self.check_gibbs,
            self.check_average_state,
            self.check_limits,
            self.check_closed_forms,
            self.check_symmetries,
            self.check_evolution,
            self.check_swap,
            self.check_gate,
            self.check_determinism,
        ]
        results = []
        for check in checks:
            result = check()
            level = logging.INFO if result.passed else logging.ERROR
            self._logger.log(level, "selftest %s: %s", result.name, "pass" if result.passed else "FAIL")
            results.append(result)
        return results
