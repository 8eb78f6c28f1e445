#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Fock-space representations of vacuum, number, coherent and superposed states, and displacements."""

import logging

from dataclasses import dataclass
from typing import ClassVar, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from bbp_homodyne.core.fock import (
    DensityOperator,
    FockBasis,
    OperatorMatrix,
    annihilation_matrix,
)
from bbp_homodyne.errors import TruncationError


pylog = logging.getLogger(__name__)

TAIL_BOUND = 1e-8
TAIL_HARD_LIMIT = 1e-3


@dataclass(frozen=True)
class StateSpec:
    """Description of a signal state, independent of any truncation.

    Vectors (occupations, amplitudes) are given per signal mode.
    Superposition terms are (coefficient, vector) pairs and product factors are single-mode specs.
    """

    KINDS: ClassVar[Tuple[str, ...]] = (
        "vacuum",
        "fock",
        "coherent",
        "coherent_superposition",
        "fock_superposition",
        "product",
    )

    kind: str
    occupations: Tuple[int, ...] = ()
    amplitudes: Tuple[complex, ...] = ()
    terms: Tuple[Tuple[complex, Tuple[Union[int, complex], ...]], ...] = ()
    factors: Tuple["StateSpec", ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(
                f"Invalid argument kind={self.kind}. (expected one of {self.KINDS})"
            )
        if self.kind in ("coherent_superposition", "fock_superposition") and len(self.terms) == 0:
            raise ValueError(f"Invalid state spec of kind={self.kind}. (expected at least one term)")
        if self.kind == "product":
            if len(self.factors) == 0:
                raise ValueError("Invalid state spec of kind=product. (expected at least one factor)")
            for factor in self.factors:
                if factor.kind == "product" or factor.mode_count not in (None, 1):
                    raise ValueError(
                        f"Invalid product factor {factor}. (expected a single-mode state spec)"
                    )

    @classmethod
    def vacuum(cls) -> "StateSpec":
        return cls("vacuum")

    @classmethod
    def fock(cls, occupations: Sequence[int]) -> "StateSpec":
        return cls("fock", occupations=tuple(int(n) for n in occupations))

    @classmethod
    def coherent(cls, amplitudes: Sequence[complex]) -> "StateSpec":
        return cls("coherent", amplitudes=tuple(complex(a) for a in amplitudes))

    @classmethod
    def coherent_superposition(
        cls, terms: Sequence[Tuple[complex, Sequence[complex]]]
    ) -> "StateSpec":
        terms = tuple((complex(c), tuple(complex(a) for a in amps)) for c, amps in terms)
        return cls("coherent_superposition", terms=terms)

    @classmethod
    def cat(cls, amplitudes: Sequence[complex], parity: int = 1) -> "StateSpec":
        """Cat state |g> + parity |-g>, e.g. the even cat for parity=1."""
        minus = [-complex(a) for a in amplitudes]
        return cls.coherent_superposition([(1.0, amplitudes), (float(parity), minus)])

    @classmethod
    def fock_superposition(
        cls, terms: Sequence[Tuple[complex, Sequence[int]]]
    ) -> "StateSpec":
        terms = tuple((complex(c), tuple(int(n) for n in occ)) for c, occ in terms)
        return cls("fock_superposition", terms=terms)

    @classmethod
    def product(cls, factors: Sequence["StateSpec"]) -> "StateSpec":
        return cls("product", factors=tuple(factors))

    @property
    def mode_count(self) -> Optional[int]:
        """Number of modes described, or None for the vacuum (any number of modes)."""
        if self.kind == "fock":
            return len(self.occupations)
        elif self.kind == "coherent":
            return len(self.amplitudes)
        elif self.kind in ("coherent_superposition", "fock_superposition"):
            lens = {len(vec) for _, vec in self.terms}
            if len(lens) != 1:
                raise ValueError(f"Invalid state spec terms lengths {sorted(lens)}. (expected equal lengths)")
            return lens.pop()
        elif self.kind == "product":
            return len(self.factors)
        else:
            return None


class PureState:
    """Normalized ket on a truncated Fock basis."""

    def __init__(
        self,
        basis: FockBasis,
        ket: np.ndarray,
        truncation_tail: float = 0.0,
    ) -> None:
        ket = np.array(ket, dtype=np.complex128)
        if ket.shape != (basis.size,):
            raise ValueError(
                f"Invalid argument ket with shape={ket.shape}. (expected ({basis.size},))"
            )
        ket.setflags(write=False)
        self._basis = basis
        self._ket = ket
        self._truncation_tail = float(truncation_tail)

    @property
    def basis(self) -> FockBasis:
        return self._basis

    @property
    def ket(self) -> np.ndarray:
        return self._ket

    @property
    def truncation_tail(self) -> float:
        """Norm lost by truncating the untruncated state, before renormalization."""
        return self._truncation_tail

    def to_density(self) -> DensityOperator:
        return DensityOperator.from_pure(self)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return complex(self._ket[self._basis.index(occupation)])

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(basis={self._basis}, truncation_tail={self._truncation_tail:.3e})"


def coherent_overlap(beta: Sequence[complex], alpha: Sequence[complex]) -> complex:
    """Untruncated overlap <beta|alpha> = exp(-(|beta|^2 + |alpha|^2 - 2 alpha conj(beta)) / 2)."""
    beta = np.asarray(beta, dtype=np.complex128).reshape(-1)
    alpha = np.asarray(alpha, dtype=np.complex128).reshape(-1)
    if beta.shape != alpha.shape:
        raise ValueError(
            f"Invalid arguments with {len(beta)} and {len(alpha)} modes. (expected the same number of modes)"
        )
    exponent = -0.5 * (np.vdot(beta, beta).real + np.vdot(alpha, alpha).real) + np.vdot(beta, alpha)
    return complex(np.exp(exponent))


def _single_mode_table(amplitude: complex, cutoff: int) -> np.ndarray:
    """Values amplitude^n / sqrt(n!) for n = 0..cutoff, by recurrence."""
    table = np.empty(cutoff + 1, dtype=np.complex128)
    table[0] = 1.0
    for n in range(1, cutoff + 1):
        table[n] = table[n - 1] * amplitude / np.sqrt(n)
    return table


def _raw_coherent_ket(basis: FockBasis, amplitudes: np.ndarray) -> np.ndarray:
    """Truncated, not renormalized, Fock expansion of a multimode coherent state."""
    ket = np.full(basis.size, np.exp(-0.5 * np.vdot(amplitudes, amplitudes).real), dtype=np.complex128)
    for mode, amplitude in enumerate(amplitudes):
        if amplitude == 0.0:
            ket = np.where(basis.states[:, mode] == 0, ket, 0.0)
        else:
            ket = ket * _single_mode_table(amplitude, basis.total_cutoff)[basis.states[:, mode]]
    return ket


def _check_tail(tail: float, tail_bound: float, hard_limit: float, name: str) -> None:
    if tail > hard_limit:
        raise TruncationError(
            f"Truncation tail {tail:.3e} of {name} is above the hard limit {hard_limit:.1e}. (increase total_cutoff)"
        )
    elif tail > tail_bound:
        pylog.warning(f"Truncation tail {tail:.3e} of {name} is above {tail_bound:.1e}.")


def _pad_vector(
    basis: FockBasis,
    values: Sequence[Union[int, complex]],
    signal_modes: int,
    dtype: type,
) -> np.ndarray:
    values = np.asarray(values, dtype=dtype).reshape(-1)
    if len(values) == basis.mode_count:
        if np.any(values[signal_modes:] != 0):
            raise ValueError(
                f"Invalid state vector {values.tolist()}. (expected no photons in local oscillator modes {signal_modes}..{basis.mode_count - 1})"
            )
        return values
    elif len(values) == signal_modes:
        padded = np.zeros(basis.mode_count, dtype=dtype)
        padded[:signal_modes] = values
        return padded
    else:
        raise ValueError(
            f"Invalid state vector of length {len(values)}. (expected {signal_modes} signal modes or {basis.mode_count} modes)"
        )


def coherent_amplitudes_to_state(
    basis: FockBasis,
    amplitudes: Sequence[complex],
    tail_bound: float = TAIL_BOUND,
    hard_limit: float = TAIL_HARD_LIMIT,
) -> PureState:
    """Truncated and renormalized multimode coherent state.

    :param basis: The truncated basis.
    :param amplitudes: One complex amplitude per mode of the basis.
    :param tail_bound: Truncation tail above which a warning is logged. defaults to 1e-8.
    :param hard_limit: Truncation tail above which a TruncationError is raised. defaults to 1e-3.
    """
    amplitudes = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if len(amplitudes) != basis.mode_count:
        raise ValueError(
            f"Invalid argument amplitudes with {len(amplitudes)} values. (expected {basis.mode_count})"
        )
    ket = _raw_coherent_ket(basis, amplitudes)
    tail = max(1.0 - float(np.vdot(ket, ket).real), 0.0)
    _check_tail(tail, tail_bound, hard_limit, f"coherent state {amplitudes.tolist()}")
    return PureState(basis, ket / np.linalg.norm(ket), tail)


def pure_state(
    basis: FockBasis,
    spec: StateSpec,
    signal_modes: Optional[int] = None,
    tail_bound: float = TAIL_BOUND,
    hard_limit: float = TAIL_HARD_LIMIT,
) -> PureState:
    """Normalized ket of a state spec, with the local oscillator modes (after signal_modes) in vacuum.

    :param basis: The truncated basis.
    :param spec: The state description.
    :param signal_modes: The number of signal modes. defaults to all modes of the basis.
    :param tail_bound: Truncation tail above which a warning is logged. defaults to 1e-8.
    :param hard_limit: Truncation tail above which a TruncationError is raised. defaults to 1e-3.
    """
    if signal_modes is None:
        signal_modes = basis.mode_count
    if not (1 <= signal_modes <= basis.mode_count):
        raise ValueError(
            f"Invalid argument signal_modes={signal_modes}. (expected a value in [1, {basis.mode_count}])"
        )

    tail = 0.0
    if spec.kind == "vacuum":
        ket = np.zeros(basis.size, dtype=np.complex128)
        ket[0] = 1.0

    elif spec.kind == "fock":
        occupation = _pad_vector(basis, spec.occupations, signal_modes, np.int64)
        ket = np.zeros(basis.size, dtype=np.complex128)
        ket[basis.index(occupation)] = 1.0

    elif spec.kind == "coherent":
        amplitudes = _pad_vector(basis, spec.amplitudes, signal_modes, np.complex128)
        return coherent_amplitudes_to_state(basis, amplitudes, tail_bound, hard_limit)

    elif spec.kind == "coherent_superposition":
        ket = np.zeros(basis.size, dtype=np.complex128)
        for coefficient, amplitudes in spec.terms:
            amplitudes = _pad_vector(basis, amplitudes, signal_modes, np.complex128)
            raw = _raw_coherent_ket(basis, amplitudes)
            term_tail = max(1.0 - float(np.vdot(raw, raw).real), 0.0)
            _check_tail(term_tail, tail_bound, hard_limit, f"coherent term {amplitudes.tolist()}")
            tail = max(tail, term_tail)
            ket += coefficient * raw

    elif spec.kind == "fock_superposition":
        ket = np.zeros(basis.size, dtype=np.complex128)
        for coefficient, occupation in spec.terms:
            occupation = _pad_vector(basis, occupation, signal_modes, np.int64)
            ket[basis.index(occupation)] += coefficient

    elif spec.kind == "product":
        if len(spec.factors) != signal_modes:
            raise ValueError(
                f"Invalid product of {len(spec.factors)} factors. (expected one factor per signal mode, i.e. {signal_modes})"
            )
        single = FockBasis(1, basis.total_cutoff)
        ket = np.ones(basis.size, dtype=np.complex128)
        for mode, factor in enumerate(spec.factors):
            factor_ket = pure_state(single, factor, 1, tail_bound, hard_limit).ket
            ket = ket * factor_ket[basis.states[:, mode]]
        ket = np.where(basis.states[:, signal_modes:].sum(axis=1) == 0, ket, 0.0)
        tail = max(1.0 - float(np.vdot(ket, ket).real), 0.0)
        _check_tail(tail, tail_bound, hard_limit, "product state")

    else:
        raise ValueError(f"Invalid argument spec.kind={spec.kind}. (expected one of {StateSpec.KINDS})")

    norm = float(np.linalg.norm(ket))
    if norm == 0.0:
        raise ValueError(f"Invalid state spec {spec}. (the superposition has zero norm)")
    return PureState(basis, ket / norm, tail)


def build_state(
    basis: FockBasis,
    spec: StateSpec,
    signal_modes: Optional[int] = None,
    tail_bound: float = TAIL_BOUND,
    hard_limit: float = TAIL_HARD_LIMIT,
) -> DensityOperator:
    """Density operator of a state spec on the joint signal + local oscillator basis.

    Superpositions are normalized after truncation, e.g. the even cat |g> + |-g> has
    squared norm 2 (1 + exp(-2|g|^2)) before normalization.
    """
    return pure_state(basis, spec, signal_modes, tail_bound, hard_limit).to_density()


def displacement_generator(
    basis: FockBasis,
    modes: Sequence[int],
    betas: Sequence[complex],
) -> OperatorMatrix:
    """Anti-Hermitian generator sum of beta_k a_k^dagger - conj(beta_k) a_k."""
    if len(modes) != len(betas):
        raise ValueError(
            f"Invalid arguments with {len(modes)} modes and {len(betas)} amplitudes. (expected equal lengths)"
        )
    entries = sp.csr_matrix((basis.size, basis.size), dtype=np.complex128)
    for mode, beta in zip(modes, betas):
        lower = annihilation_matrix(basis, mode).to_sparse()
        entries = entries + complex(beta) * lower.conj().T - complex(beta).conjugate() * lower
    return OperatorMatrix(basis, entries.tocsr(), hermitian=False)


def multimode_displacement_matrix(
    basis: FockBasis,
    modes: Sequence[int],
    betas: Sequence[complex],
    verbose: int = 0,
) -> OperatorMatrix:
    """Product of commuting single-mode displacements, as one matrix exponential on the truncated basis."""
    cutoff_budget = basis.total_cutoff / 4.0
    for mode, beta in zip(modes, betas):
        if abs(beta) ** 2 > cutoff_budget:
            pylog.warning(
                f"Displacement |beta|^2={abs(beta) ** 2:.3f} on mode {mode} is above N_max/4={cutoff_budget:.2f}; the truncated result is cutoff-sensitive."
            )
    generator = displacement_generator(basis, modes, betas)
    if verbose >= 2:
        pylog.debug(f"Exponentiating displacement generator on {basis}.")
    return OperatorMatrix(basis, scipy.linalg.expm(generator.to_dense()), hermitian=False)


def displacement_matrix(
    basis: FockBasis,
    mode: int,
    beta: complex,
    verbose: int = 0,
) -> OperatorMatrix:
    """Truncated displacement D_beta = expm(beta a^dagger - conj(beta) a) of one mode (Pade scaling and squaring)."""
    return multimode_displacement_matrix(basis, [mode], [beta], verbose)
