#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Homodyne measurement with calorimeters.

Signal modes a_k are mixed on balanced beamsplitters with local oscillator modes b_k prepared
in coherent states of amplitude R beta_k, and the weighted energy difference of the two output
ports is rescaled by delta = 1 / R. In the displaced frame this observable is

    q_delta = q + delta * C,    C = sum_k omega_k (a_k^dagger b_k + b_k^dagger a_k),

acting on the signal state with vacuum local oscillators. Modes 0..N-1 of the joint basis are
the signal modes and modes N..2N-1 the local oscillators.
"""

import logging
import math

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from scipy.special import eval_genlaguerre, gammaln
from scipy.stats import poisson

from bbp_homodyne.core.fock import (
    DensityOperator,
    FockBasis,
    OperatorMatrix,
    SpectralDistribution,
    _distribution_from_eigen,
    annihilation_matrix,
    edge_mass,
    eigendecompose_hermitian,
    expectation,
    merge_atoms,
    number_matrix,
    truncation_tail,
)
from bbp_homodyne.core.optics import (
    QuadratureSpec,
    beamsplit_coherent,
    check_lo_vacuum,
    fock_lift_two_mode,
    lo_amplitude,
    signal_restriction,
)
from bbp_homodyne.core.states import (
    StateSpec,
    multimode_displacement_matrix,
    pure_state,
)
from bbp_homodyne.errors import TruncationError


pylog = logging.getLogger(__name__)

SKELLAM_TAIL_TOL = 1e-10
OUTGOING_TAIL_TOL = 1e-8
BALANCED_SPLITTER = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class MeasurementDistribution(SpectralDistribution):
    """Outcome law of the rescaled calorimeter difference at one coupling delta."""

    delta: float = 0.0
    source: str = "displaced_frame"


@dataclass(frozen=True, eq=False)
class BBPOperator:
    """Measurement operator q_delta on the joint basis, with its two parts."""

    spec: QuadratureSpec
    matrix: OperatorMatrix
    quadrature: OperatorMatrix
    coupling: OperatorMatrix

    @property
    def basis(self) -> FockBasis:
        return self.matrix.basis

    @property
    def delta(self) -> float:
        return self.spec.delta


def _check_joint_basis(basis: FockBasis, spec: QuadratureSpec) -> None:
    if basis.mode_count != 2 * spec.mode_count:
        raise ValueError(
            f"Invalid basis {basis}. (expected {2 * spec.mode_count} modes for {spec.mode_count} signal modes and their local oscillators)"
        )


def quadrature_matrix(basis: FockBasis, spec: QuadratureSpec) -> OperatorMatrix:
    """Target quadrature q = -i sum_k (alpha_k a_k^dagger - conj(alpha_k) a_k) on the first N modes."""
    entries = sp.csr_matrix((basis.size, basis.size), dtype=np.complex128)
    for mode, alpha in enumerate(spec.alpha):
        lower = annihilation_matrix(basis, mode).to_sparse()
        entries = entries - 1j * (alpha * lower.conj().T - alpha.conjugate() * lower)
    return OperatorMatrix(basis, entries.tocsr(), hermitian=True)


def coupling_matrix(basis: FockBasis, spec: QuadratureSpec) -> OperatorMatrix:
    """C = sum_k omega_k (a_k^dagger b_k + b_k^dagger a_k)."""
    _check_joint_basis(basis, spec)
    n_signal = spec.mode_count
    entries = sp.csr_matrix((basis.size, basis.size), dtype=np.complex128)
    for mode, weight in enumerate(spec.weights):
        a = annihilation_matrix(basis, mode).to_sparse()
        b = annihilation_matrix(basis, n_signal + mode).to_sparse()
        hop = a.conj().T @ b
        entries = entries + weight * (hop + hop.conj().T)
    return OperatorMatrix(basis, entries.tocsr(), hermitian=True)


def build_q_delta(basis: FockBasis, spec: QuadratureSpec) -> BBPOperator:
    """Build q_delta = q + delta C on the joint basis of N signal and N local oscillator modes.

    With a single mode, alpha = i / sqrt(2) and omega = 1, <0,0| q_delta^2 |0,0> = 1/2 for every delta.
    """
    _check_joint_basis(basis, spec)
    quadrature = quadrature_matrix(basis, spec)
    coupling = coupling_matrix(basis, spec)
    matrix = quadrature + spec.delta * coupling
    return BBPOperator(spec, matrix, quadrature, coupling)


def calorimeter_difference_matrix(basis: FockBasis, spec: QuadratureSpec) -> OperatorMatrix:
    """delta * sum_k omega_k (c_k^dagger c_k - d_k^dagger d_k) from the output modes of the displaced local oscillators.

    c_k = (a_k + b_k + R beta_k) / sqrt(2) and d_k = (a_k - b_k - R beta_k) / sqrt(2).
    With unit weights this is the standard homodyne observable.
    """
    _check_joint_basis(basis, spec)
    n_signal = spec.mode_count
    betas = lo_amplitude(spec)
    identity = sp.identity(basis.size, dtype=np.complex128, format="csr")
    entries = sp.csr_matrix((basis.size, basis.size), dtype=np.complex128)
    for mode, (weight, beta) in enumerate(zip(spec.weights, betas)):
        a = annihilation_matrix(basis, mode).to_sparse()
        b = annihilation_matrix(basis, n_signal + mode).to_sparse()
        c = (a + b + beta * identity) / math.sqrt(2.0)
        d = (a - b - beta * identity) / math.sqrt(2.0)
        entries = entries + weight * (c.conj().T @ c - d.conj().T @ d)
    return OperatorMatrix(basis, (spec.delta * entries).tocsr(), hermitian=True)


def _gauge_phases(basis: FockBasis, spec: QuadratureSpec) -> np.ndarray:
    """Diagonal of exp(i sum_k phi_k (n_ak + n_bk)) with phi_k = pi/2 - arg(alpha_k)."""
    angles = np.array([np.pi / 2 - np.angle(a) if a != 0.0 else 0.0 for a in spec.alpha])
    n_signal = spec.mode_count
    pair_counts = basis.states[:, :n_signal] + basis.states[:, n_signal:]
    return np.exp(1j * (pair_counts @ angles))


def _real_gauge(op: BBPOperator) -> tuple:
    phases = _gauge_phases(op.basis, op.spec)
    scaling = sp.diags(phases, format="csr")
    gauged = scaling @ op.matrix.to_sparse() @ scaling.conj().T
    imag = float(abs(gauged.imag).max()) if gauged.nnz > 0 else 0.0
    if imag > 1e-12 * max(1.0, op.matrix.max_abs()):
        pylog.warning(f"Real gauge left an imaginary part {imag:.3e}; falling back to complex arithmetic.")
        return op.matrix, np.ones(op.basis.size, dtype=np.complex128)
    real = sp.csr_matrix(gauged.real, dtype=np.complex128)
    return OperatorMatrix(op.basis, real, hermitian=True), phases


def bbp_distribution(
    state: DensityOperator,
    op: BBPOperator,
    merge_tol: Optional[float] = None,
    real_gauge: bool = True,
    validate: bool = False,
    verbose: int = 0,
) -> MeasurementDistribution:
    """Outcome distribution of q_delta in a state with vacuum local oscillators (displaced frame).

    :param state: The joint state, local oscillators in vacuum within 1e-10.
    :param op: The measurement operator from :func:`build_q_delta`.
    :param merge_tol: Eigenvalues closer than this are merged. defaults to 1e-9 times the spectral range.
    :param real_gauge: If True, conjugate by a diagonal phase that makes q_delta real symmetric. defaults to True.
    :param validate: If True, check the eigendecomposition residual and orthonormality. defaults to False.
    :param verbose: The verbose level. defaults to 0.
    """
    op.basis.check_same(state.basis)
    check_lo_vacuum(state, op.spec.mode_count)

    if real_gauge:
        matrix, phases = _real_gauge(op)
    else:
        matrix, phases = op.matrix, np.ones(op.basis.size, dtype=np.complex128)

    if verbose >= 1:
        pylog.info(f"Diagonalizing q_delta for delta={op.delta!r} on {op.basis}.")
    values, vectors = eigendecompose_hermitian(matrix, validate)

    probabilities = np.zeros(len(values))
    for weight, ket in state.components():
        probabilities += weight * np.abs(vectors.T.conj() @ (phases * ket)) ** 2

    dist = _distribution_from_eigen(values, probabilities, merge_tol, truncation_tail(state), verbose)
    return MeasurementDistribution(
        dist.values,
        dist.probabilities,
        dist.truncation_tail,
        delta=op.delta,
        source="displaced_frame",
    )


def explicit_lo_distribution(
    signal: StateSpec,
    spec: QuadratureSpec,
    total_cutoff: int,
    merge_tol: Optional[float] = None,
    verbose: int = 0,
) -> MeasurementDistribution:
    """Outcome distribution with the local oscillators represented explicitly.

    The local oscillators are displaced by R beta, both ports go through the Fock-space
    beamsplitter unitary and delta (E_c - E_d) is read from the output occupations.
    Only feasible for moderate R.

    :param signal: The signal state description.
    :param spec: The quadrature, weights and coupling.
    :param total_cutoff: The total cutoff of the joint basis.
    :param merge_tol: Outcomes closer than this are merged. defaults to 1e-9 times the outcome range.
    :param verbose: The verbose level. defaults to 0.
    """
    n_signal = spec.mode_count
    betas = lo_amplitude(spec)
    budget = total_cutoff / 4.0
    if float(np.max(np.abs(betas) ** 2)) > budget:
        raise TruncationError(
            f"Local oscillator intensity {float(np.max(np.abs(betas) ** 2)):.3f} is above N_max/4={budget:.2f} for delta={spec.delta!r}. (increase total_cutoff or delta)"
        )

    basis = FockBasis(2 * n_signal, total_cutoff)
    ket = pure_state(basis, signal, n_signal).ket
    lo_modes = list(range(n_signal, 2 * n_signal))
    ket = multimode_displacement_matrix(basis, lo_modes, betas, verbose).apply(ket)
    tail = edge_mass(DensityOperator.from_ket(basis, ket / np.linalg.norm(ket)), 2)
    for mode in range(n_signal):
        ket = fock_lift_two_mode(basis, mode, n_signal + mode, BALANCED_SPLITTER).apply(ket)

    weights = np.asarray(spec.weights)
    outcomes = spec.delta * ((basis.states[:, :n_signal] - basis.states[:, n_signal:]) @ weights)
    probabilities = np.abs(ket) ** 2
    if merge_tol is None:
        merge_tol = 1e-9 * float(outcomes.max() - outcomes.min())
    values, probabilities = merge_atoms(outcomes, probabilities, merge_tol)

    if verbose >= 1:
        pylog.info(f"Explicit local oscillator distribution with {len(values)} atoms (delta={spec.delta!r}).")
    return MeasurementDistribution(values, probabilities, tail, delta=spec.delta, source="explicit_lo")


def _poisson_pmf(mean: float, tail: float) -> np.ndarray:
    if mean == 0.0:
        return np.ones(1)
    upper = int(poisson.isf(tail, mean))
    return poisson.pmf(np.arange(upper + 1), mean)


def skellam_oracle_distribution(
    gamma: Union[StateSpec, Sequence[complex]],
    spec: QuadratureSpec,
    tail_tol: float = SKELLAM_TAIL_TOL,
) -> MeasurementDistribution:
    """Closed-form outcome law for product coherent signals.

    Each output port carries an independent Poisson count, so each mode contributes
    delta omega_k times a Poisson difference; the modes are combined by direct convolution.

    :param gamma: Coherent amplitudes of the signal modes, or a vacuum/coherent state spec.
    :param spec: The quadrature, weights and coupling.
    :param tail_tol: Total probability dropped from the Poisson tails. defaults to 1e-10.
    """
    if isinstance(gamma, StateSpec):
        if gamma.kind == "vacuum":
            gamma = [0.0] * spec.mode_count
        elif gamma.kind == "coherent":
            gamma = gamma.amplitudes
        else:
            raise ValueError(
                f"Invalid argument gamma of kind={gamma.kind}. (expected a product coherent state)"
            )
    gamma = np.asarray(gamma, dtype=np.complex128).reshape(-1)
    if len(gamma) != spec.mode_count:
        raise ValueError(f"Invalid argument gamma with {len(gamma)} amplitudes. (expected {spec.mode_count})")

    gamma_c, gamma_d = beamsplit_coherent(gamma, lo_amplitude(spec))
    per_variable_tail = tail_tol / (2 * spec.mode_count)

    values = np.zeros(1)
    probabilities = np.ones(1)
    for mode, weight in enumerate(spec.weights):
        pmf_c = _poisson_pmf(abs(gamma_c[mode]) ** 2, per_variable_tail)
        pmf_d = _poisson_pmf(abs(gamma_d[mode]) ** 2, per_variable_tail)
        differences = np.arange(-(len(pmf_d) - 1), len(pmf_c))
        pmf = np.convolve(pmf_c, pmf_d[::-1])
        mode_values = spec.delta * weight * differences

        values = np.add.outer(values, mode_values).ravel()
        probabilities = np.outer(probabilities, pmf).ravel()
        tol = 1e-9 * float(values.max() - values.min()) if len(values) > 1 else 0.0
        values, probabilities = merge_atoms(values, probabilities, tol)

    tail = max(1.0 - float(probabilities.sum()), 0.0)
    return MeasurementDistribution(values, probabilities, tail, delta=spec.delta, source="skellam")


def displaced_number_amplitudes(mu: complex, max_photons: int, max_level: int) -> np.ndarray:
    """Matrix <m| D(mu) |j> for m <= max_photons and j <= max_level, by the generalized Laguerre closed form."""
    m = np.arange(max_photons + 1)[:, None]
    j = np.arange(max_level + 1)[None, :]
    if mu == 0.0:
        return (m == j).astype(np.complex128)

    x = abs(mu) ** 2
    low = np.minimum(m, j)
    high = np.maximum(m, j)
    gap = high - low
    log_mag = 0.5 * (gammaln(low + 1.0) - gammaln(high + 1.0)) + gap * math.log(abs(mu)) - 0.5 * x
    laguerre = eval_genlaguerre(low, gap.astype(np.float64), x)
    angle = np.where(m >= j, np.angle(mu), np.angle(-np.conj(mu)))
    return np.exp(log_mag) * laguerre * np.exp(1j * gap * angle)


def _signal_components(state: DensityOperator, n_signal: int) -> list:
    basis = state.basis
    if basis.mode_count == n_signal:
        return state.components()
    check_lo_vacuum(state, n_signal)
    _, indices = signal_restriction(basis, n_signal)
    return [(weight, ket[indices]) for weight, ket in state.components()]


def outgoing_fock_distribution(
    state: DensityOperator,
    spec: QuadratureSpec,
    verbose: int = 0,
) -> MeasurementDistribution:
    """Exact outcome law for one signal mode, from displaced number-state amplitudes of both ports.

    |n>_a splits into sum_j sqrt(C(n, j)) 2^(-n/2) |j>_c |n - j>_d and the local oscillator
    displacement factorizes into D_c(R beta / sqrt(2)) D_d(-R beta / sqrt(2)), so no cutoff is
    imposed on the local oscillator photons. Outcomes lie on the lattice delta omega Z.

    :param state: Single-mode signal state, or joint state with the local oscillator in vacuum.
    :param spec: A single-mode quadrature spec.
    :param verbose: The verbose level. defaults to 0.
    """
    if spec.mode_count != 1:
        raise ValueError(
            f"Invalid argument spec with {spec.mode_count} modes. (expected a single signal mode)"
        )
    components = _signal_components(state, 1)
    mu = complex(lo_amplitude(spec)[0]) / math.sqrt(2.0)

    populations = sum(weight * np.abs(ket) ** 2 for weight, ket in components)
    occupied = np.flatnonzero(populations > 1e-18)
    max_level = int(occupied.max()) if len(occupied) > 0 else 0
    radius = (abs(mu) + 1.0) * math.sqrt(2 * max_level + 1)
    max_photons = int(math.ceil(abs(mu) ** 2 + max_level + 10.0 * radius + 10.0))

    port_c = displaced_number_amplitudes(mu, max_photons, max_level)
    port_d = displaced_number_amplitudes(-mu, max_photons, max_level)

    levels = np.arange(max_level + 1)
    totals = levels[:, None] + levels[None, :]
    inside = totals <= max_level
    log_split = 0.5 * (gammaln(totals + 1.0) - gammaln(levels[:, None] + 1.0) - gammaln(levels[None, :] + 1.0)) - 0.5 * totals * math.log(2.0)
    split = np.where(inside, np.exp(np.where(inside, log_split, 0.0)), 0.0)

    joint = np.zeros((max_photons + 1, max_photons + 1))
    for weight, ket in components:
        coefs = np.where(inside, ket[np.minimum(totals, max_level)], 0.0) * split
        amplitudes = port_c @ coefs @ port_d.T
        joint += weight * np.abs(amplitudes) ** 2

    photons = np.arange(max_photons + 1)
    differences = np.subtract.outer(photons, photons).ravel() + max_photons
    probabilities = np.bincount(differences, weights=joint.ravel(), minlength=2 * max_photons + 1)
    values = spec.delta * spec.weights[0] * np.arange(-max_photons, max_photons + 1)
    keep = probabilities > 0.0

    tail = max(1.0 - float(probabilities.sum()), 0.0)
    if tail > OUTGOING_TAIL_TOL:
        pylog.warning(f"Outgoing Fock distribution misses probability {tail:.3e} (max_photons={max_photons}).")
    if verbose >= 1:
        pylog.info(f"Outgoing Fock distribution with max_photons={max_photons} and max_level={max_level} (delta={spec.delta!r}).")
    return MeasurementDistribution(values[keep], probabilities[keep], tail, delta=spec.delta, source="outgoing_fock")


def second_moment_bias(state: DensityOperator, spec: QuadratureSpec) -> float:
    """delta^2 sum_k omega_k^2 <n_k>, the exact excess of the second moment."""
    total = sum(
        weight**2 * float(expectation(number_matrix(state.basis, mode), state))
        for mode, weight in enumerate(spec.weights)
    )
    return spec.delta**2 * total


def third_moment_bias_coefficient(state: DensityOperator, spec: QuadratureSpec) -> float:
    """c_3 = sum_k omega_k^2 <q n_k + n_k q + a_k^dagger q a_k>, with r_3(delta) = c_3 delta^2 for vacuum local oscillators."""
    basis = state.basis
    q = quadrature_matrix(basis, spec)
    total = 0.0
    for mode, weight in enumerate(spec.weights):
        n = number_matrix(basis, mode)
        a = annihilation_matrix(basis, mode)
        term = q @ n + n @ q + a.adjoint() @ q @ a
        term = OperatorMatrix(basis, term.entries, hermitian=True)
        total += weight**2 * float(expectation(term, state))
    return total
