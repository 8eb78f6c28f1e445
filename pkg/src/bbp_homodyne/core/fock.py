#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Truncated multimode Fock spaces, ladder operators and spectral distributions.

The basis keeps every occupation vector whose total photon number is at most the
total cutoff, ordered by total photon number and then lexicographically.
"""

import logging
import math

from dataclasses import dataclass
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from bbp_homodyne.errors import BasisMismatchError, CapacityError, NumericError
from bbp_homodyne.utils.limits import _get_max_dim, _get_sparse_dim


pylog = logging.getLogger(__name__)

ArrayOrSparse = Union[np.ndarray, sp.spmatrix]

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
CONTAMINATION_TOL = 1e-8


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Yield the occupation vectors of a fixed total in ascending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class FockBasis:
    """Ordered occupation-number basis of M bosonic modes with a global total-photon cutoff."""

    def __init__(
        self,
        mode_count: int,
        total_cutoff: int,
        max_dim: Optional[int] = None,
        verbose: int = 0,
    ) -> None:
        if mode_count < 1:
            raise ValueError(
                f"Invalid argument mode_count={mode_count}. (expected at least 1 mode)"
            )
        if total_cutoff < 0:
            raise ValueError(
                f"Invalid argument total_cutoff={total_cutoff}. (expected a non-negative integer)"
            )

        max_dim = _get_max_dim(max_dim)
        size = math.comb(total_cutoff + mode_count, mode_count)
        if size > max_dim:
            raise CapacityError(
                f"Cannot build a basis of {size} states for mode_count={mode_count} and total_cutoff={total_cutoff}. (maximal dimension is {max_dim}, see BBP_MAX_DIM)"
            )

        states = [
            occupation
            for total in range(total_cutoff + 1)
            for occupation in _compositions(total, mode_count)
        ]

        self._mode_count = mode_count
        self._total_cutoff = total_cutoff
        self._states = _readonly(np.array(states, dtype=np.int64).reshape(size, mode_count))
        self._shells = _readonly(self._states.sum(axis=1))
        self._index: Dict[Tuple[int, ...], int] = {
            occupation: i for i, occupation in enumerate(states)
        }
        self._lowered: Dict[int, np.ndarray] = {}

        if verbose >= 2:
            pylog.debug(f"Built {self}.")

    # Properties
    @property
    def mode_count(self) -> int:
        return self._mode_count

    @property
    def total_cutoff(self) -> int:
        return self._total_cutoff

    @property
    def size(self) -> int:
        return len(self._states)

    @property
    def states(self) -> np.ndarray:
        """Occupation vectors as a read-only integer array of shape (size, mode_count)."""
        return self._states

    @property
    def shells(self) -> np.ndarray:
        """Total photon number of every basis state."""
        return self._shells

    # Public methods
    def index(self, occupation: Sequence[int]) -> int:
        key = tuple(int(n) for n in occupation)
        try:
            return self._index[key]
        except KeyError:
            raise ValueError(
                f"Invalid argument occupation={key}. (expected {self._mode_count} non-negative occupations with total <= {self._total_cutoff})"
            )

    def occupation(self, index: int) -> Tuple[int, ...]:
        return tuple(int(n) for n in self._states[index])

    def lowered_indices(self, mode: int) -> np.ndarray:
        """Index of each state with one photon removed from mode, or -1 when the mode is empty."""
        self._check_mode(mode)
        if mode not in self._lowered:
            lowered = np.full(self.size, -1, dtype=np.int64)
            for i, occupation in enumerate(self._index.keys()):
                if occupation[mode] > 0:
                    target = occupation[:mode] + (occupation[mode] - 1,) + occupation[mode + 1 :]
                    lowered[i] = self._index[target]
            self._lowered[mode] = _readonly(lowered)
        return self._lowered[mode]

    def check_same(self, other: "FockBasis") -> None:
        if self != other:
            raise BasisMismatchError(
                f"Invalid basis {other}. (expected the same basis as {self})"
            )

    # Magic methods
    def __contains__(self, occupation: Sequence[int]) -> bool:
        return tuple(int(n) for n in occupation) in self._index

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FockBasis)
            and self._mode_count == other._mode_count
            and self._total_cutoff == other._total_cutoff
        )

    def __hash__(self) -> int:
        return hash((self._mode_count, self._total_cutoff))

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        repr_dic = {
            "mode_count": self._mode_count,
            "total_cutoff": self._total_cutoff,
            "size": self.size,
        }
        repr_str = ", ".join(f"{k}={v}" for k, v in repr_dic.items())
        return f"{self.__class__.__name__}({repr_str})"

    # Private methods
    def _check_mode(self, mode: int) -> None:
        if not (0 <= mode < self._mode_count):
            raise ValueError(
                f"Invalid argument mode={mode}. (expected an index in [0, {self._mode_count}))"
            )


def build_basis(
    mode_count: int,
    total_cutoff: int,
    max_dim: Optional[int] = None,
    verbose: int = 0,
) -> FockBasis:
    """Build the truncated Fock basis of mode_count modes with total photon number <= total_cutoff.

    :param mode_count: The number of modes M >= 1.
    :param total_cutoff: The global cutoff N_max >= 0.
    :param max_dim: The maximal dimension allowed. defaults to the value of :func:`~bbp_homodyne.utils.limits.get_default_max_dim`.
    :param verbose: The verbose level. defaults to 0.
    :returns: The basis, of size C(N_max + M, M).
    """
    return FockBasis(mode_count, total_cutoff, max_dim, verbose)


class OperatorMatrix:
    """Square matrix on a truncated Fock basis, stored dense or as a scipy.sparse matrix."""

    def __init__(
        self,
        basis: FockBasis,
        entries: ArrayOrSparse,
        hermitian: Optional[bool] = None,
    ) -> None:
        if entries.shape != (basis.size, basis.size):
            raise ValueError(
                f"Invalid argument entries with shape={entries.shape}. (expected ({basis.size}, {basis.size}) for {basis})"
            )
        if sp.issparse(entries):
            entries = sp.csr_matrix(entries, dtype=np.complex128)
        else:
            entries = _readonly(np.array(entries, dtype=np.complex128))

        self._basis = basis
        self._entries = entries
        self._hermitian = hermitian
        self._dense: Optional[np.ndarray] = None

    # Properties
    @property
    def basis(self) -> FockBasis:
        return self._basis

    @property
    def entries(self) -> ArrayOrSparse:
        return self._entries

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._entries)

    @property
    def hermitian(self) -> bool:
        if self._hermitian is None:
            self._hermitian = self.is_hermitian()
        return self._hermitian

    # Public methods
    def to_dense(self) -> np.ndarray:
        if not self.is_sparse:
            return self._entries  # type: ignore
        if self._dense is None:
            self._dense = _readonly(self._entries.toarray())
        return self._dense

    def to_sparse(self) -> sp.csr_matrix:
        if self.is_sparse:
            return self._entries  # type: ignore
        return sp.csr_matrix(self._entries)

    def adjoint(self) -> "OperatorMatrix":
        entries = self._entries.conj().T
        if self.is_sparse:
            entries = sp.csr_matrix(entries)
        return OperatorMatrix(self._basis, entries, self._hermitian)

    def apply(self, ket: np.ndarray) -> np.ndarray:
        return self._entries @ ket

    def max_abs(self) -> float:
        if self.is_sparse:
            return float(abs(self._entries).max()) if self._entries.nnz > 0 else 0.0
        return float(np.abs(self._entries).max(initial=0.0))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return (self - self.adjoint()).max_abs() <= tol

    # Magic methods
    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._basis.check_same(other._basis)
        hermitian = (self._hermitian and other._hermitian) or None
        return OperatorMatrix(self._basis, self._combine(other, 1.0), hermitian)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._basis.check_same(other._basis)
        hermitian = (self._hermitian and other._hermitian) or None
        return OperatorMatrix(self._basis, self._combine(other, -1.0), hermitian)

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(self._basis, -self._entries, self._hermitian)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        scalar = complex(scalar)
        hermitian = self._hermitian if scalar.imag == 0.0 else None
        return OperatorMatrix(self._basis, self._entries * scalar, hermitian)

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._basis.check_same(other._basis)
        if self.is_sparse and other.is_sparse:
            entries = self._entries @ other._entries
        else:
            entries = self.to_dense() @ other.to_dense()
        return OperatorMatrix(self._basis, entries)

    def __repr__(self) -> str:
        repr_dic = {
            "basis": self._basis,
            "sparse": self.is_sparse,
            "hermitian": self._hermitian,
        }
        repr_str = ", ".join(f"{k}={v}" for k, v in repr_dic.items())
        return f"{self.__class__.__name__}({repr_str})"

    # Private methods
    def _combine(self, other: "OperatorMatrix", sign: float) -> ArrayOrSparse:
        if self.is_sparse and other.is_sparse:
            return self._entries + sign * other._entries
        return self.to_dense() + sign * other.to_dense()


Component = Tuple[float, np.ndarray]


class DensityOperator:
    """Positive semidefinite unit-trace operator on a truncated Fock basis.

    The state is held either as a dense matrix or as a list of weighted kets
    (exact for pure states); each representation is derived from the other on demand.
    """

    def __init__(
        self,
        basis: FockBasis,
        entries: Optional[np.ndarray] = None,
        components: Optional[Sequence[Component]] = None,
        validate: bool = True,
    ) -> None:
        if (entries is None) == (components is None):
            raise ValueError(
                "Invalid arguments entries and components. (expected exactly one of them)"
            )

        if entries is not None:
            entries = np.array(entries, dtype=np.complex128)
            if entries.shape != (basis.size, basis.size):
                raise ValueError(
                    f"Invalid argument entries with shape={entries.shape}. (expected ({basis.size}, {basis.size}))"
                )
            entries = _readonly(entries)
        else:
            components = [
                (float(weight), _readonly(np.array(ket, dtype=np.complex128)))
                for weight, ket in components  # type: ignore
            ]
            for _, ket in components:
                if ket.shape != (basis.size,):
                    raise ValueError(
                        f"Invalid component ket with shape={ket.shape}. (expected ({basis.size},))"
                    )

        self._basis = basis
        self._entries = entries
        self._components: Optional[List[Component]] = components  # type: ignore

        if validate:
            self._validate()

    @classmethod
    def from_ket(cls, basis: FockBasis, ket: np.ndarray) -> "DensityOperator":
        return cls(basis, components=[(1.0, ket)])

    @classmethod
    def from_pure(cls, state: Any) -> "DensityOperator":
        """Rank-one density operator of any object exposing basis and ket (e.g. a PureState)."""
        return cls.from_ket(state.basis, state.ket)

    # Properties
    @property
    def basis(self) -> FockBasis:
        return self._basis

    @property
    def entries(self) -> np.ndarray:
        if self._entries is None:
            entries = np.zeros((self._basis.size, self._basis.size), dtype=np.complex128)
            for weight, ket in self._components:  # type: ignore
                entries += weight * np.outer(ket, ket.conj())
            self._entries = _readonly(entries)
        return self._entries

    @property
    def is_pure(self) -> bool:
        return len(self.components()) == 1

    # Public methods
    def components(self) -> List[Component]:
        """Return (weight, ket) pairs with sum of weight * |ket><ket| equal to the state."""
        if self._components is None:
            weights, vectors = scipy.linalg.eigh(self._entries)
            keep = weights > POSITIVITY_TOL * 1e-4
            self._components = [
                (float(w), _readonly(vectors[:, i].copy()))
                for i, w in zip(np.flatnonzero(keep), weights[keep])
            ]
        return self._components

    def basis_probabilities(self) -> np.ndarray:
        """Diagonal of the density matrix in the Fock basis."""
        if self._components is not None:
            probs = np.zeros(self._basis.size)
            for weight, ket in self._components:
                probs += weight * np.abs(ket) ** 2
            return probs
        return np.diagonal(self._entries).real.copy()

    def trace(self) -> float:
        return float(self.basis_probabilities().sum())

    def __repr__(self) -> str:
        repr_dic = {
            "basis": self._basis,
            "rank": len(self._components) if self._components is not None else None,
        }
        repr_str = ", ".join(f"{k}={v}" for k, v in repr_dic.items())
        return f"{self.__class__.__name__}({repr_str})"

    # Private methods
    def _validate(self) -> None:
        if self._entries is not None:
            herm_err = float(np.abs(self._entries - self._entries.conj().T).max(initial=0.0))
            if herm_err > HERMITIAN_TOL:
                raise ValueError(
                    f"Invalid density operator with hermitian error {herm_err:.3e}. (expected <= {HERMITIAN_TOL})"
                )
            min_eig = float(scipy.linalg.eigvalsh(self._entries).min(initial=0.0))
            if min_eig < -POSITIVITY_TOL:
                raise ValueError(
                    f"Invalid density operator with minimal eigenvalue {min_eig:.3e}. (expected >= {-POSITIVITY_TOL})"
                )
        else:
            weights = [w for w, _ in self._components]  # type: ignore
            if min(weights, default=0.0) < 0.0:
                raise ValueError(
                    f"Invalid components weights {weights}. (expected non-negative weights)"
                )

        trace = self.trace()
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(
                f"Invalid density operator with trace {trace!r}. (expected 1 within {TRACE_TOL})"
            )


@dataclass(frozen=True, eq=False)
class SpectralDistribution:
    """Discrete probability law: sorted atoms and their probabilities."""

    values: np.ndarray
    probabilities: np.ndarray
    truncation_tail: float = 0.0

    def __post_init__(self) -> None:
        values = _readonly(np.array(self.values, dtype=np.float64).reshape(-1))
        probabilities = _readonly(np.array(self.probabilities, dtype=np.float64).reshape(-1))
        if values.shape != probabilities.shape:
            raise ValueError(
                f"Invalid distribution with {len(values)} values and {len(probabilities)} probabilities. (expected equal lengths)"
            )
        if len(values) > 1 and not np.all(np.diff(values) > 0.0):
            raise ValueError("Invalid distribution values. (expected strictly increasing values)")
        if probabilities.min(initial=0.0) < -1e-12:
            raise ValueError(
                f"Invalid distribution with probability {probabilities.min()}. (expected >= -1e-12)"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probabilities", np.maximum(probabilities, 0.0))

    @property
    def total_mass(self) -> float:
        return float(self.probabilities.sum())

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        mean = self.mean
        return float(np.dot(self.probabilities, (self.values - mean) ** 2))

    def moment(self, order: int) -> float:
        return float(np.dot(self.probabilities, self.values**order))

    def expect(self, fn: Callable[[np.ndarray], np.ndarray]) -> Union[float, complex]:
        """Return the sum of fn(value) * probability, complex when fn is complex-valued."""
        fvalues = np.broadcast_to(np.asarray(fn(self.values)), self.values.shape)
        result = np.dot(self.probabilities, fvalues)
        if np.iscomplexobj(result):
            return complex(result)
        return float(result)

    def cdf_at(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Right-continuous cumulative distribution function."""
        cumsum = np.concatenate([[0.0], np.cumsum(self.probabilities)])
        result = cumsum[np.searchsorted(self.values, x, side="right")]
        return float(result) if np.ndim(result) == 0 else result

    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probabilities.tolist()))

    def __len__(self) -> int:
        return len(self.values)


def merge_atoms(
    values: np.ndarray,
    probabilities: np.ndarray,
    tol: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sort atoms and merge those lying within tol of the first atom of their group.

    The merged value is the probability-weighted mean of the group (plain mean for a null group).
    """
    order = np.argsort(values, kind="stable")
    values = np.asarray(values, dtype=np.float64)[order]
    probabilities = np.asarray(probabilities, dtype=np.float64)[order]
    if len(values) == 0:
        return values, probabilities

    starts = [0]
    group_first = values[0]
    for i in range(1, len(values)):
        if values[i] - group_first > tol:
            starts.append(i)
            group_first = values[i]
    starts_arr = np.array(starts)

    group_probs = np.add.reduceat(probabilities, starts_arr)
    weighted = np.add.reduceat(probabilities * values, starts_arr)
    counts = np.diff(np.append(starts_arr, len(values)))
    plain = np.add.reduceat(values, starts_arr) / counts
    safe_probs = np.where(group_probs > 0.0, group_probs, 1.0)
    group_values = np.where(group_probs > 0.0, weighted / safe_probs, plain)

    # Weighted means may break strict ordering of nearly-touching groups.
    group_values = np.maximum.accumulate(group_values)
    keep = np.concatenate([[True], np.diff(group_values) > 0.0])
    if not np.all(keep):
        group_ids = np.cumsum(keep) - 1
        group_probs = np.bincount(group_ids, weights=group_probs)
        group_values = group_values[keep]
    return group_values, group_probs


def annihilation_matrix(basis: FockBasis, mode: int) -> OperatorMatrix:
    """Lowering operator of one mode: <m|a_k|n> = sqrt(n_k) when m is n with one photon removed."""
    lowered = basis.lowered_indices(mode)
    sources = np.flatnonzero(lowered >= 0)
    data = np.sqrt(basis.states[sources, mode].astype(np.float64))
    entries = sp.coo_matrix(
        (data, (lowered[sources], sources)),
        shape=(basis.size, basis.size),
    )
    return OperatorMatrix(basis, entries.tocsr(), hermitian=False)


def creation_matrix(basis: FockBasis, mode: int) -> OperatorMatrix:
    return annihilation_matrix(basis, mode).adjoint()


def number_matrix(basis: FockBasis, mode: int) -> OperatorMatrix:
    basis._check_mode(mode)
    occupations = basis.states[:, mode].astype(np.complex128)
    return OperatorMatrix(basis, sp.diags(occupations, format="csr"), hermitian=True)


def weighted_energy_matrix(
    basis: FockBasis,
    weights: Sequence[float],
    mode_subset: Optional[Sequence[int]] = None,
) -> OperatorMatrix:
    """Diagonal energy sum over the subset of modes, weighted by strictly positive frequencies.

    :param basis: The truncated basis.
    :param weights: One weight per mode of the subset.
    :param mode_subset: The modes summed over. defaults to all modes.
    """
    if mode_subset is None:
        mode_subset = list(range(basis.mode_count))
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) != len(mode_subset):
        raise ValueError(
            f"Invalid argument weights with {len(weights)} values. (expected one weight per mode of mode_subset={list(mode_subset)})"
        )
    if np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
        raise ValueError(f"Invalid argument weights={weights.tolist()}. (expected strictly positive weights)")
    for mode in mode_subset:
        basis._check_mode(mode)

    energies = basis.states[:, list(mode_subset)] @ weights
    return OperatorMatrix(
        basis, sp.diags(energies.astype(np.complex128), format="csr"), hermitian=True
    )


def eigendecompose_hermitian(
    op: OperatorMatrix,
    validate: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator with scipy.linalg.eigh.

    Real symmetric inputs are decomposed in real arithmetic.

    :param op: The Hermitian operator.
    :param validate: If True, check the residual and the orthonormality of the eigenvectors. defaults to False.
    :returns: The ascending eigenvalues and the matrix of eigenvectors (as columns).
    """
    if not op.is_hermitian():
        raise ValueError(
            f"Invalid argument op={op}. (expected a Hermitian operator within {HERMITIAN_TOL})"
        )
    matrix = op.to_dense()
    if np.abs(matrix.imag).max(initial=0.0) == 0.0:
        matrix = matrix.real

    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except (scipy.linalg.LinAlgError, ValueError) as err:
        raise NumericError(f"Eigensolver failed for {op}: {err}")

    if validate:
        scale = max(float(np.abs(values).max(initial=0.0)), 1.0)
        residual = float(np.abs(matrix @ vectors - vectors * values).max(initial=0.0))
        if residual > 1e-10 * scale:
            raise NumericError(
                f"Eigendecomposition residual {residual:.3e} is above {1e-10 * scale:.3e}."
            )
        gram = vectors.conj().T @ vectors
        ortho = float(np.abs(gram - np.eye(len(values))).max(initial=0.0))
        if ortho > 1e-10:
            raise NumericError(f"Eigenvectors orthonormality error {ortho:.3e} is above 1e-10.")
    return values, vectors


def shell_probabilities(state: DensityOperator) -> np.ndarray:
    """Probability of each total photon number 0..N_max."""
    basis = state.basis
    return np.bincount(
        basis.shells,
        weights=state.basis_probabilities(),
        minlength=basis.total_cutoff + 1,
    )


def edge_mass(state: DensityOperator, depth: int) -> float:
    """Probability on the depth highest shells, i.e. total photon number > N_max - depth."""
    if depth <= 0:
        return 0.0
    shells = shell_probabilities(state)
    start = max(state.basis.total_cutoff - depth + 1, 0)
    return float(shells[start:].sum())


def truncation_tail(state: DensityOperator) -> float:
    """Probability on the two highest shells, total photon number >= N_max - 1."""
    return edge_mass(state, 2)


def spectral_distribution(
    op: OperatorMatrix,
    state: DensityOperator,
    merge_tol: Optional[float] = None,
    validate: bool = False,
    verbose: int = 0,
) -> SpectralDistribution:
    """Distribution of the outcomes of a Hermitian operator measured on a state.

    :param op: The Hermitian operator.
    :param state: The state, on the same basis.
    :param merge_tol: Eigenvalues closer than this are merged. defaults to 1e-9 times the spectral range.
    :param validate: If True, check the eigendecomposition residual and orthonormality. defaults to False.
    :param verbose: The verbose level. defaults to 0.
    :returns: The spectral distribution, with probabilities summing to 1.
    """
    op.basis.check_same(state.basis)
    values, vectors = eigendecompose_hermitian(op, validate)
    probabilities = np.zeros(len(values))
    for weight, ket in state.components():
        probabilities += weight * np.abs(vectors.conj().T @ ket) ** 2
    return _distribution_from_eigen(values, probabilities, merge_tol, truncation_tail(state), verbose)


def _distribution_from_eigen(
    values: np.ndarray,
    probabilities: np.ndarray,
    merge_tol: Optional[float],
    tail: float,
    verbose: int,
) -> SpectralDistribution:
    if merge_tol is None:
        merge_tol = 1e-9 * float(values.max(initial=0.0) - values.min(initial=0.0))
    if merge_tol < 0.0:
        raise ValueError(f"Invalid argument merge_tol={merge_tol}. (expected a non-negative tolerance)")

    merged_values, merged_probs = merge_atoms(values, probabilities, merge_tol)
    total = float(merged_probs.sum())
    if abs(total - 1.0) > TRACE_TOL:
        pylog.warning(f"Spectral probabilities sum to {total!r} instead of 1.")
    if verbose >= 2:
        pylog.debug(
            f"Spectral distribution with {len(merged_values)} atoms from {len(values)} eigenvalues (merge_tol={merge_tol:.3e})."
        )
    return SpectralDistribution(merged_values, merged_probs, tail)


def expectation(op: OperatorMatrix, state: DensityOperator) -> Union[float, complex]:
    """Return tr(rho A); real for Hermitian operators."""
    op.basis.check_same(state.basis)
    value = sum(
        weight * np.vdot(ket, op.apply(ket)) for weight, ket in state.components()
    )
    value = complex(value)
    if op.hermitian:
        _check_real(value, "expectation")
        return value.real
    return value


@dataclass(frozen=True)
class Moment:
    """Result of a moment evaluation, with the truncation audit of the state."""

    order: int
    value: float
    edge_mass: float = 0.0
    contaminated: bool = False


def operator_moment(
    op: OperatorMatrix,
    state: DensityOperator,
    order: int,
    sparse_dim: Optional[int] = None,
    contamination_tol: float = CONTAMINATION_TOL,
    verbose: int = 0,
) -> Moment:
    """Return tr(rho A^n) by iterated matrix-vector products.

    The result is flagged as contaminated when the state carries more than contamination_tol
    probability on the shells within n of the cutoff.

    :param op: The Hermitian operator A.
    :param state: The state rho.
    :param order: The moment order n >= 0.
    :param sparse_dim: Dimension above which sparse products are used. defaults to :func:`~bbp_homodyne.utils.limits.get_default_sparse_dim`.
    :param contamination_tol: Edge probability above which the moment is flagged. defaults to 1e-8.
    :param verbose: The verbose level. defaults to 0.
    """
    if order < 0:
        raise ValueError(f"Invalid argument order={order}. (expected a non-negative integer)")
    op.basis.check_same(state.basis)
    if not op.hermitian:
        raise ValueError(f"Invalid argument op={op}. (expected a Hermitian operator)")

    sparse_dim = _get_sparse_dim(sparse_dim)
    matrix = op.to_sparse() if op.basis.size > sparse_dim else op.to_dense()

    half = order // 2
    value = 0.0j
    for weight, ket in state.components():
        left = ket
        for _ in range(half):
            left = matrix @ left
        right = left
        if order % 2 == 1:
            right = matrix @ right
        value += weight * np.vdot(left, right)

    _check_real(complex(value), f"moment of order {order}")
    edge = edge_mass(state, order)
    contaminated = edge > contamination_tol
    if contaminated:
        pylog.warning(
            f"Moment of order {order} is contaminated by the cutoff: edge probability {edge:.3e} > {contamination_tol:.1e} (total_cutoff={op.basis.total_cutoff})."
        )
    elif verbose >= 2:
        pylog.debug(f"Moment of order {order} = {value.real!r} (edge probability {edge:.3e}).")
    return Moment(order, float(value.real), edge, contaminated)


def _check_real(value: complex, name: str) -> None:
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise NumericError(
            f"Imaginary part {value.imag:.3e} of Hermitian {name} is above tolerance."
        )
