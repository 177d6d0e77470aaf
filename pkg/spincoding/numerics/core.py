"""Dense 4x4 (and 2x2) complex linear algebra used as the brute-force oracle.

Every function accepts a single matrix or a stack of matrices with shape
``(..., n, n)``; stacks are processed in one vectorised pass. Two-qubit
operators and vectors use the fixed basis ``|11>, |10>, |01>, |00>``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
import numpy.typing as npt

from ..utilities.errors import PreconditionError

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

HERMITIAN_TOL = 1e-10
OFF_DIAGONAL_TOL = 1e-14
MAX_SWEEPS = 100
TRACE_TOL = 1e-9
NEGATIVE_EIGENVALUE_TOL = 1e-8
CLAMP_WINDOW = 1e-10
NORM_TOL = 1e-12
LEAD_TOL = 1e-12
TIE_TOL = 1e-12

logger = logging.getLogger("spincoding")


@dataclass(frozen=True)
class SchmidtFactors:
    spin1: ComplexArray
    spin2: ComplexArray
    global_phase: float
    residual: float
    reconstruction_error: float


@dataclass(frozen=True)
class NotProduct:
    residual: float


def dagger(m: npt.ArrayLike) -> ComplexArray:
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def max_asymmetry(m: npt.ArrayLike) -> RealArray:
    m = np.asarray(m)
    return np.max(np.abs(m - dagger(m)), axis=(-2, -1))


def as_square_stack(m: npt.ArrayLike) -> ComplexArray:
    a = np.array(m, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise PreconditionError("Expected a square matrix or a stack of square matrices.", {"shape": list(a.shape)})
    if not np.all(np.isfinite(a)):
        raise PreconditionError("Matrix entries must be finite.")
    return a


def _off_diagonal_norm(a: ComplexArray) -> RealArray:
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=-1))


def _rotate(a: ComplexArray, v: ComplexArray, p: int, q: int) -> None:
    """Annihilate a[:, p, q] in place with one complex Jacobi rotation per matrix."""
    apq = a[:, p, q]
    mag = np.abs(apq)
    phase = np.ones_like(apq)
    nonzero = mag > 0.0
    phase[nonzero] = apq[nonzero] / mag[nonzero]

    diff = a[:, q, q].real - a[:, p, p].real
    sign = np.where(diff >= 0.0, 1.0, -1.0)
    # |theta| <= pi/4 keeps the sweep convergent
    theta = 0.5 * sign * np.arctan2(2.0 * mag, np.abs(diff))
    c = np.cos(theta)
    s = np.sin(theta)

    g_pp = c.astype(np.complex128)
    g_pq = s.astype(np.complex128)
    g_qp = -s * np.conj(phase)
    g_qq = c * np.conj(phase)

    col_p = a[:, :, p].copy()
    col_q = a[:, :, q].copy()
    a[:, :, p] = col_p * g_pp[:, None] + col_q * g_qp[:, None]
    a[:, :, q] = col_p * g_pq[:, None] + col_q * g_qq[:, None]

    row_p = a[:, p, :].copy()
    row_q = a[:, q, :].copy()
    a[:, p, :] = np.conj(g_pp)[:, None] * row_p + np.conj(g_qp)[:, None] * row_q
    a[:, q, :] = np.conj(g_pq)[:, None] * row_p + np.conj(g_qq)[:, None] * row_q
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0

    vec_p = v[:, :, p].copy()
    vec_q = v[:, :, q].copy()
    v[:, :, p] = vec_p * g_pp[:, None] + vec_q * g_qp[:, None]
    v[:, :, q] = vec_p * g_pq[:, None] + vec_q * g_qq[:, None]


def _jacobi(a: ComplexArray) -> Tuple[RealArray, ComplexArray]:
    count, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    sweeps = 0
    active = _off_diagonal_norm(a) > OFF_DIAGONAL_TOL
    while active.any() and sweeps < MAX_SWEEPS:
        # converged matrices are frozen so results never depend on batch composition
        idx = np.nonzero(active)[0]
        sub_a = a[idx]
        sub_v = v[idx]
        for p, q in pairs:
            _rotate(sub_a, sub_v, p, q)
        a[idx] = sub_a
        v[idx] = sub_v
        sweeps += 1
        active = _off_diagonal_norm(a) > OFF_DIAGONAL_TOL

    if active.any():
        logger.warning(
            "Jacobi sweep limit reached for %s of %s matrices (max off-diagonal norm %.3e)",
            int(active.sum()),
            count,
            float(np.max(_off_diagonal_norm(a))),
        )
    return np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy(), v


def _order_eigenpairs(w: RealArray, v: ComplexArray) -> Tuple[RealArray, ComplexArray]:
    n = w.shape[-1]
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)

    magnitudes = np.abs(v)
    significant = magnitudes > LEAD_TOL
    lead_idx = np.argmax(significant, axis=-2)
    lead = np.take_along_axis(v, lead_idx[:, None, :], axis=-2)[:, 0, :]
    lead_mag = np.abs(lead)
    phase = np.where(lead_mag > 0.0, lead / np.where(lead_mag > 0.0, lead_mag, 1.0), 1.0)
    v = v * np.conj(phase)[:, None, :]

    rows = np.arange(w.shape[0])
    for _ in range(n):
        for i in range(n - 1):
            tie = np.abs(w[:, i + 1] - w[:, i]) <= TIE_TOL * np.maximum(1.0, np.abs(w[:, i]))
            later = (lead_idx[:, i + 1] < lead_idx[:, i]) | (
                (lead_idx[:, i + 1] == lead_idx[:, i]) & (lead_mag[:, i + 1] > lead_mag[:, i])
            )
            swap = rows[tie & later]
            if swap.size == 0:
                continue
            for arr in (w, lead_idx, lead_mag):
                arr[swap, i], arr[swap, i + 1] = arr[swap, i + 1].copy(), arr[swap, i].copy()
            v[swap, :, i], v[swap, :, i + 1] = v[swap, :, i + 1].copy(), v[swap, :, i].copy()
    return w, v


def eig_hermitian(m: npt.ArrayLike) -> Tuple[RealArray, ComplexArray]:
    """Eigenpairs of a Hermitian matrix (or stack) by cyclic complex Jacobi.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and the
    eigenvectors as columns, each phase-normalised so its first non-negligible
    amplitude is real and positive. Degenerate eigenvalues are ordered by the
    position and then the size of that leading amplitude.
    """
    a = as_square_stack(m)
    worst = float(np.max(max_asymmetry(a))) if a.size else 0.0
    if worst > HERMITIAN_TOL:
        raise PreconditionError("Matrix is not Hermitian.", {"max_asymmetry": worst})

    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    stack = (0.5 * (a + dagger(a))).reshape(-1, n, n)
    w, v = _jacobi(stack)
    w, v = _order_eigenpairs(w, v)
    return w.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def eigvals_hermitian(m: npt.ArrayLike) -> RealArray:
    return eig_hermitian(m)[0]


def hermitian_function(m: npt.ArrayLike, func: Callable[[RealArray], npt.ArrayLike]) -> ComplexArray:
    """U diag(func(eigenvalues)) U^dagger for a Hermitian matrix or stack."""
    w, v = eig_hermitian(m)
    fw = np.asarray(func(w), dtype=np.complex128)
    return (v * fw[..., None, :]) @ dagger(v)


def expm_i(m: npt.ArrayLike, t: npt.ArrayLike) -> ComplexArray:
    """exp(-i M t) through the spectral decomposition of M.

    ``t`` is a scalar or an array broadcastable against the stack shape of ``m``.
    """
    times = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(times)):
        raise PreconditionError("Evolution time must be finite.", {"t": times.tolist()})
    return hermitian_function(m, lambda w: np.exp(-1j * w * times[..., None]))


def _validate_density(rho: ComplexArray) -> RealArray:
    trace = np.real(np.trace(rho, axis1=-2, axis2=-1))
    worst_trace = float(np.max(np.abs(trace - 1.0)))
    if worst_trace > TRACE_TOL:
        raise PreconditionError("Density matrix must have unit trace.", {"max_trace_error": worst_trace})
    w = eigvals_hermitian(rho)
    lowest = float(np.min(w))
    if lowest < -NEGATIVE_EIGENVALUE_TOL:
        raise PreconditionError("Density matrix has a negative eigenvalue.", {"min_eigenvalue": lowest})
    return w


def density_spectrum(rho: npt.ArrayLike) -> RealArray:
    """Validated eigenvalues of a density matrix with tiny negatives clamped to zero."""
    a = as_square_stack(rho)
    w = _validate_density(a)
    outside_window = w < -CLAMP_WINDOW
    if np.any(outside_window):
        logger.debug("Clamped %s eigenvalues below -%.0e to zero", int(outside_window.sum()), CLAMP_WINDOW)
    return np.where(w < 0.0, 0.0, w)


def entropy_bits(probabilities: npt.ArrayLike) -> Union[float, RealArray]:
    p = np.asarray(probabilities, dtype=np.float64)
    positive = p > 0.0
    terms = np.zeros_like(p)
    terms[positive] = -p[positive] * np.log2(p[positive])
    total = np.sum(terms, axis=-1)
    return float(total) if np.ndim(total) == 0 else total


def von_neumann_entropy(rho: npt.ArrayLike) -> Union[float, RealArray]:
    """S(rho) in bits, with 0 log 0 = 0."""
    return entropy_bits(density_spectrum(rho))


def _is_operator(x: np.ndarray) -> bool:
    return x.ndim >= 2 and x.shape[-1] == x.shape[-2]


def check_unit_vector(psi: npt.ArrayLike, tol: float = NORM_TOL) -> ComplexArray:
    vec = np.asarray(psi, dtype=np.complex128)
    norms = np.linalg.norm(vec, axis=-1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > tol:
        raise PreconditionError("State vector must have unit norm.", {"max_norm_error": worst})
    return vec


def partial_trace_first(state: npt.ArrayLike) -> ComplexArray:
    """Reduced 2x2 density matrix of spin 1 from a 4-vector or a 4x4 density matrix.

    A ``(4, 4)`` input is read as a density matrix, never as four vectors.
    """
    x = np.asarray(state, dtype=np.complex128)
    if x.shape[-2:] == (4, 4):
        density_spectrum(x)
        return np.einsum("...ijkj->...ik", x.reshape(x.shape[:-2] + (2, 2, 2, 2)))
    if x.shape[-1] != 4:
        raise PreconditionError("Expected a two-qubit state.", {"shape": list(x.shape)})
    psi = check_unit_vector(x)
    a, b, c, d = psi[..., 0], psi[..., 1], psi[..., 2], psi[..., 3]
    rho = np.empty(psi.shape[:-1] + (2, 2), dtype=np.complex128)
    rho[..., 0, 0] = np.abs(a) ** 2 + np.abs(b) ** 2
    rho[..., 1, 1] = np.abs(c) ** 2 + np.abs(d) ** 2
    rho[..., 0, 1] = a * np.conj(c) + b * np.conj(d)
    rho[..., 1, 0] = np.conj(rho[..., 0, 1])
    return rho


def partial_trace_second(rho: npt.ArrayLike) -> ComplexArray:
    """Reduced 2x2 density matrix of spin 2 from a 4x4 density matrix (or stack)."""
    x = np.asarray(rho, dtype=np.complex128)
    if not _is_operator(x) or x.shape[-1] != 4:
        raise PreconditionError("Expected a 4x4 density matrix.", {"shape": list(x.shape)})
    return np.einsum("...ijil->...jl", x.reshape(x.shape[:-2] + (2, 2, 2, 2)))


def _leading_phase(vec: ComplexArray) -> complex:
    for amp in vec:
        if abs(amp) > LEAD_TOL:
            return complex(amp / abs(amp))
    return 1.0 + 0.0j


def schmidt_factor(psi: npt.ArrayLike, tol: float) -> Union[SchmidtFactors, NotProduct]:
    """Split a two-qubit pure state into single-spin factors when it is a product state.

    The amplitudes form the coefficient matrix [[a, b], [c, d]]; the state is a
    product exactly when its determinant vanishes. Spin 1's first non-negligible
    amplitude is made real and non-negative, as is spin 2's, and the phase they
    shed is returned as ``global_phase``.
    """
    if tol <= 0:
        raise PreconditionError("Tolerance must be positive.", {"tol": tol})
    vec = check_unit_vector(np.asarray(psi, dtype=np.complex128).reshape(4))
    coeffs = vec.reshape(2, 2)
    residual = float(abs(coeffs[0, 0] * coeffs[1, 1] - coeffs[0, 1] * coeffs[1, 0]))
    if residual > tol:
        return NotProduct(residual=residual)

    u, _, vh = np.linalg.svd(coeffs)
    spin1 = u[:, 0]
    spin2 = vh[0, :]
    phase1 = _leading_phase(spin1)
    phase2 = _leading_phase(spin2)
    spin1 = spin1 * np.conj(phase1)
    spin2 = spin2 * np.conj(phase2)
    global_phase = float(np.angle(phase1 * phase2))
    rebuilt = np.exp(1j * global_phase) * np.kron(spin1, spin2)
    return SchmidtFactors(
        spin1=spin1,
        spin2=spin2,
        global_phase=global_phase,
        residual=residual,
        reconstruction_error=float(np.max(np.abs(rebuilt - vec))),
    )


def phase_aligned_distance(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """max |e^{i phi} a - b| with phi taken from the overlap <a, b>."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    overlap = np.sum(np.conj(a) * b)
    phase = overlap / abs(overlap) if abs(overlap) > 0.0 else 1.0
    return float(np.max(np.abs(phase * a - b)))


def random_unitary(rng: np.random.Generator, n: int = 4) -> ComplexArray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(rng: np.random.Generator, n: int = 4, rank: int | None = None) -> ComplexArray:
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ dagger(g)
    return rho / np.real(np.trace(rho))


def random_hermitian(rng: np.random.Generator, size: int, n: int = 4, scale: float = 2.0) -> ComplexArray:
    """Stack of Hermitian matrices with real and imaginary parts in [-scale, scale]."""
    re = rng.uniform(-scale, scale, (size, n, n))
    im = rng.uniform(-scale, scale, (size, n, n))
    upper = np.triu(re + 1j * im, 1)
    diag = rng.uniform(-scale, scale, (size, n))
    m = upper + dagger(upper)
    idx = np.arange(n)
    m[:, idx, idx] = diag
    return m
