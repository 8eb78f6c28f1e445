#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Quadrature descriptions, local oscillator amplitudes and passive linear optics on Fock spaces.

A mode transformation U (b_j = sum_k U_jk a_k) is lifted to the Fock unitary W with
W a_k^dagger W^dagger = sum_l U_lk a_l^dagger, so that the coefficients of a ket in the
new mode basis are the entries of W ket. The lift is a homomorphism: W(UV) = W(U) W(V).
"""

import logging
import math

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from scipy.special import gammaln

from bbp_homodyne.core.fock import DensityOperator, FockBasis, OperatorMatrix


pylog = logging.getLogger(__name__)

LO_VACUUM_TOL = 1e-10
NORMALIZED_TOL = 1e-12

Rotation = Tuple[int, int, np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    """Target quadrature q = -i sum_k (alpha_k a_k^dagger - conj(alpha_k) a_k), mode frequencies and coupling."""

    alpha: Tuple[complex, ...]
    weights: Tuple[float, ...]
    delta: float

    def __post_init__(self) -> None:
        alpha = tuple(complex(a) for a in self.alpha)
        weights = tuple(float(w) for w in self.weights)
        if len(alpha) == 0 or len(alpha) != len(weights):
            raise ValueError(
                f"Invalid quadrature with {len(alpha)} alpha values and {len(weights)} weights. (expected equal non-zero lengths)"
            )
        if not all(np.isfinite(w) and w > 0.0 for w in weights):
            raise ValueError(f"Invalid argument weights={weights}. (expected strictly positive frequencies)")
        if all(a == 0.0 for a in alpha):
            raise ValueError(f"Invalid argument alpha={alpha}. (expected at least one non-zero entry)")
        if not (np.isfinite(self.delta) and self.delta >= 0.0):
            raise ValueError(f"Invalid argument delta={self.delta}. (expected a finite value >= 0, 0 being the ideal limit)")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def mode_count(self) -> int:
        return len(self.alpha)

    @property
    def scale(self) -> float:
        """s = sqrt(sum |alpha_k|^2)."""
        return math.sqrt(sum(abs(a) ** 2 for a in self.alpha))

    @property
    def is_normalized(self) -> bool:
        return abs(self.scale**2 - 0.5) <= NORMALIZED_TOL

    @property
    def oscillator_strength(self) -> float:
        """R = 1 / delta, infinite in the ideal limit."""
        return math.inf if self.delta == 0.0 else 1.0 / self.delta

    def with_delta(self, delta: float) -> "QuadratureSpec":
        return replace(self, delta=delta)


def lo_amplitude(spec: QuadratureSpec) -> np.ndarray:
    """Coherent amplitude of each local oscillator mode: -i alpha_k / (omega_k delta)."""
    if spec.delta == 0.0:
        raise ValueError("Invalid argument spec.delta=0. (expected a non-zero coupling)")
    alpha = np.asarray(spec.alpha, dtype=np.complex128)
    weights = np.asarray(spec.weights, dtype=np.float64)
    return -1j * alpha / (weights * spec.delta)


def beamsplit_coherent(
    gamma_a: Sequence[complex],
    gamma_b: Sequence[complex],
) -> Tuple[np.ndarray, np.ndarray]:
    """Output coherent amplitudes ((a + b) / sqrt(2), (a - b) / sqrt(2)) of balanced beamsplitters."""
    gamma_a = np.asarray(gamma_a, dtype=np.complex128)
    gamma_b = np.asarray(gamma_b, dtype=np.complex128)
    if gamma_a.shape != gamma_b.shape:
        raise ValueError(
            f"Invalid arguments with shapes {gamma_a.shape} and {gamma_b.shape}. (expected equal shapes)"
        )
    return (gamma_a + gamma_b) / math.sqrt(2.0), (gamma_a - gamma_b) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class TargetModeFrame:
    """Unit vector w of the target mode b' = sum_k w_k a_k, and a unitary completion with first row w."""

    w: np.ndarray
    completion: np.ndarray
    scale: float


def target_mode_frame(spec: QuadratureSpec) -> TargetModeFrame:
    """Frame in which q = s (b' + b'^dagger) with w_k = i conj(alpha_k) / s.

    The completion keeps w as first row; the remaining rows are the standard basis vectors,
    except the one of the largest |w_k|, orthonormalized by Gram-Schmidt in index order.
    """
    alpha = np.asarray(spec.alpha, dtype=np.complex128)
    scale = spec.scale
    w = 1j * alpha.conj() / scale
    n = len(w)

    pivot = int(np.argmax(np.abs(w)))
    rows = [w]
    for k in range(n):
        if k == pivot:
            continue
        vec = np.zeros(n, dtype=np.complex128)
        vec[k] = 1.0
        for row in rows:
            vec = vec - np.vdot(row, vec) * row
        rows.append(vec / np.linalg.norm(vec))
    completion = np.array(rows)

    w.setflags(write=False)
    completion.setflags(write=False)
    return TargetModeFrame(w, completion, scale)


def givens_decomposition(unitary: np.ndarray) -> Tuple[List[Rotation], np.ndarray]:
    """Factor a unitary as G_1^dagger ... G_L^dagger diag(phases).

    Each rotation (i, i + 1, g) acts on two neighbouring modes with the 2x2 unitary g.
    """
    work = np.array(unitary, dtype=np.complex128)
    n = work.shape[0]
    if work.shape != (n, n) or not np.allclose(work @ work.conj().T, np.eye(n), atol=1e-10):
        raise ValueError(f"Invalid argument unitary with shape={work.shape}. (expected a square unitary matrix)")

    rotations = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            b = work[row, col]
            if b == 0.0:
                continue
            a = work[row - 1, col]
            rho = math.hypot(abs(a), abs(b))
            g = np.array([[a.conjugate(), b.conjugate()], [-b, a]]) / rho
            work[[row - 1, row], :] = g @ work[[row - 1, row], :]
            rotations.append((row - 1, row, g))
    return rotations, np.diagonal(work).copy()


def _powers(z: complex, n: int) -> np.ndarray:
    return np.concatenate([[1.0 + 0.0j], np.cumprod(np.full(n, z, dtype=np.complex128))])


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    return gammaln(np.arange(n + 1) + 1.0)


def _two_mode_sector(t: np.ndarray, total: int) -> np.ndarray:
    """Matrix of the lifted 2x2 transformation on the sector |p, total - p>, columns indexed by p."""
    logf = _log_factorials(total)
    sector = np.zeros((total + 1, total + 1), dtype=np.complex128)
    for p in range(total + 1):
        q = total - p
        first = np.array([math.comb(p, r) for r in range(p + 1)]) * _powers(t[0, 0], p) * _powers(t[1, 0], p)[::-1]
        second = np.array([math.comb(q, s) for s in range(q + 1)]) * _powers(t[0, 1], q) * _powers(t[1, 1], q)[::-1]
        coefs = np.convolve(first, second)
        u = np.arange(total + 1)
        norms = np.exp(0.5 * (logf[u] + logf[total - u] - logf[p] - logf[q]))
        sector[:, p] = coefs * norms
    return sector


def fock_lift_two_mode(
    basis: FockBasis,
    mode_i: int,
    mode_j: int,
    t: np.ndarray,
) -> OperatorMatrix:
    """Fock unitary of a 2x2 mode transformation t acting on modes (mode_i, mode_j).

    The lift is block diagonal in the photon number of the pair, hence exact on the truncated basis.
    """
    t = np.asarray(t, dtype=np.complex128)
    if t.shape != (2, 2):
        raise ValueError(f"Invalid argument t with shape={t.shape}. (expected (2, 2))")
    if mode_i == mode_j:
        raise ValueError(f"Invalid arguments mode_i={mode_i} and mode_j={mode_j}. (expected distinct modes)")
    basis._check_mode(mode_i)
    basis._check_mode(mode_j)

    sectors = [_two_mode_sector(t, total) for total in range(basis.total_cutoff + 1)]
    rows, cols, data = [], [], []
    for col, occupation in enumerate(basis.states.tolist()):
        p = occupation[mode_i]
        total = p + occupation[mode_j]
        column = sectors[total][:, p]
        for u in range(total + 1):
            occupation[mode_i] = u
            occupation[mode_j] = total - u
            rows.append(basis.index(occupation))
            cols.append(col)
            data.append(column[u])

    entries = sp.coo_matrix((data, (rows, cols)), shape=(basis.size, basis.size))
    return OperatorMatrix(basis, entries.tocsr(), hermitian=False)


def fock_lift_phases(basis: FockBasis, phases: Sequence[complex]) -> OperatorMatrix:
    """Diagonal Fock unitary of the mode transformation diag(phases): |n> -> prod_k phases_k^n_k |n>."""
    phases = np.asarray(phases, dtype=np.complex128)
    if len(phases) != basis.mode_count or not np.allclose(np.abs(phases), 1.0, atol=1e-12):
        raise ValueError(
            f"Invalid argument phases={phases.tolist()}. (expected {basis.mode_count} unit-modulus values)"
        )
    diagonal = np.exp(1j * (basis.states @ np.angle(phases)))
    return OperatorMatrix(basis, sp.diags(diagonal, format="csr"), hermitian=False)


def mode_unitary_factors(basis: FockBasis, unitary: np.ndarray) -> List[OperatorMatrix]:
    """Fock factors of a mode unitary on all modes of basis, in application order."""
    unitary = np.asarray(unitary, dtype=np.complex128)
    if unitary.shape != (basis.mode_count, basis.mode_count):
        raise ValueError(
            f"Invalid argument unitary with shape={unitary.shape}. (expected ({basis.mode_count}, {basis.mode_count}))"
        )
    rotations, phases = givens_decomposition(unitary)
    factors = [fock_lift_phases(basis, phases)]
    for mode_i, mode_j, g in reversed(rotations):
        factors.append(fock_lift_two_mode(basis, mode_i, mode_j, g.conj().T))
    return factors


def apply_mode_unitary(
    basis: FockBasis,
    unitary: np.ndarray,
    kets: Sequence[np.ndarray],
) -> List[np.ndarray]:
    """Coefficients of each ket in the rotated mode basis b_j = sum_k U_jk a_k."""
    factors = mode_unitary_factors(basis, unitary)
    results = []
    for ket in kets:
        for factor in factors:
            ket = factor.apply(ket)
        results.append(ket)
    return results


def signal_restriction(basis: FockBasis, signal_modes: int) -> Tuple[FockBasis, np.ndarray]:
    """Signal-only basis and the joint indices of its states (local oscillator modes in vacuum)."""
    if not (1 <= signal_modes <= basis.mode_count):
        raise ValueError(
            f"Invalid argument signal_modes={signal_modes}. (expected a value in [1, {basis.mode_count}])"
        )
    signal_basis = FockBasis(signal_modes, basis.total_cutoff)
    padding = (0,) * (basis.mode_count - signal_modes)
    indices = np.array(
        [basis.index(tuple(occupation) + padding) for occupation in signal_basis.states.tolist()],
        dtype=np.int64,
    )
    return signal_basis, indices


def local_oscillator_mass(state: DensityOperator, signal_modes: int) -> float:
    """Probability that any mode after the first signal_modes modes is occupied."""
    excited = state.basis.states[:, signal_modes:].sum(axis=1) > 0
    return float(state.basis_probabilities()[excited].sum())


def check_lo_vacuum(state: DensityOperator, signal_modes: int, tol: float = LO_VACUUM_TOL) -> None:
    mass = local_oscillator_mass(state, signal_modes)
    if mass > tol:
        raise ValueError(
            f"Invalid state with local oscillator occupation probability {mass:.3e}. (expected vacuum local oscillators within {tol:.0e})"
        )


@lru_cache(maxsize=None)
def _rest_groups(basis: FockBasis) -> Tuple[np.ndarray, int]:
    """Group id of each state by its occupations of modes 1..M-1."""
    keys: Dict[Tuple[int, ...], int] = {}
    ids = np.array(
        [keys.setdefault(tuple(occ[1:]), len(keys)) for occ in basis.states.tolist()],
        dtype=np.int64,
    )
    ids.setflags(write=False)
    return ids, len(keys)


def _first_mode_matrix(basis: FockBasis, ket: np.ndarray) -> np.ndarray:
    ids, count = _rest_groups(basis)
    matrix = np.zeros((basis.total_cutoff + 1, count), dtype=np.complex128)
    matrix[basis.states[:, 0], ids] = ket
    return matrix


def _rotated_signal_kets(
    kets: Sequence[np.ndarray],
    basis: FockBasis,
    frame: TargetModeFrame,
) -> Tuple[FockBasis, List[np.ndarray]]:
    signal_modes = len(frame.w)
    signal_basis, indices = signal_restriction(basis, signal_modes)
    subkets = [np.asarray(ket)[indices] for ket in kets]
    return signal_basis, apply_mode_unitary(signal_basis, frame.completion, subkets)


def reduce_cross_operator(
    ket_left: np.ndarray,
    ket_right: np.ndarray,
    basis: FockBasis,
    frame: TargetModeFrame,
) -> np.ndarray:
    """Partial trace on the target mode of |ket_right><ket_left|, both with local oscillators in vacuum."""
    signal_basis, (left, right) = _rotated_signal_kets([ket_left, ket_right], basis, frame)
    return _first_mode_matrix(signal_basis, right) @ _first_mode_matrix(signal_basis, left).conj().T


def rotate_to_target_mode(
    state: DensityOperator,
    frame: TargetModeFrame,
    verbose: int = 0,
) -> np.ndarray:
    """Reduced single-mode density matrix of the target mode b' = sum_k w_k a_k.

    The mode transformation is applied as two-mode rotations lifted per photon sector,
    then every other mode is traced out. Local oscillator modes (after the signal modes) must be in vacuum.

    :param state: The state on a basis whose first len(frame.w) modes are the signal modes.
    :param frame: The target mode frame.
    :param verbose: The verbose level. defaults to 0.
    :returns: The (N_max + 1) x (N_max + 1) reduced density matrix.
    """
    check_lo_vacuum(state, len(frame.w))
    components = state.components()
    signal_basis, rotated = _rotated_signal_kets([ket for _, ket in components], state.basis, frame)

    reduced = np.zeros((signal_basis.total_cutoff + 1,) * 2, dtype=np.complex128)
    for (weight, _), ket in zip(components, rotated):
        matrix = _first_mode_matrix(signal_basis, ket)
        reduced += weight * (matrix @ matrix.conj().T)

    if verbose >= 2:
        pylog.debug(f"Reduced target-mode state has trace {np.trace(reduced).real!r}.")
    return reduced


def target_mode_state(
    state: DensityOperator,
    frame: TargetModeFrame,
    single_basis: Optional[FockBasis] = None,
) -> DensityOperator:
    """Reduced target-mode state as a single-mode DensityOperator."""
    reduced = rotate_to_target_mode(state, frame)
    if single_basis is None:
        single_basis = FockBasis(1, state.basis.total_cutoff)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityOperator(single_basis, entries=reduced, validate=False)
