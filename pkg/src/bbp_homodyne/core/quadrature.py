#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Ideal quadrature statistics from the reduced state of the target mode."""

import logging
import math

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from scipy.integrate import cumulative_trapezoid, trapezoid

from bbp_homodyne.core.fock import DensityOperator, operator_moment
from bbp_homodyne.core.measurement import quadrature_matrix
from bbp_homodyne.core.optics import (
    QuadratureSpec,
    TargetModeFrame,
    reduce_cross_operator,
    rotate_to_target_mode,
    target_mode_frame,
)
from bbp_homodyne.core.states import PureState


pylog = logging.getLogger(__name__)

DEFAULT_POINTS = 2001
DEFAULT_WIDTH = 8.0
MOMENT_AGREEMENT_TOL = 1e-7


def hermite_functions(n_max: int, x: Union[float, np.ndarray]) -> np.ndarray:
    """Normalized Hermite functions psi_0..psi_n_max at x, shape (n_max + 1, len(x)).

    psi_n(x) = sqrt(2/n) x psi_{n-1}(x) - sqrt((n-1)/n) psi_{n-2}(x).
    """
    if n_max < 0:
        raise ValueError(f"Invalid argument n_max={n_max}. (expected a non-negative integer)")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    table = np.empty((n_max + 1, len(x)))
    table[0] = math.pi**-0.25 * np.exp(-0.5 * x**2)
    if n_max >= 1:
        table[1] = math.sqrt(2.0) * x * table[0]
    for n in range(2, n_max + 1):
        table[n] = math.sqrt(2.0 / n) * x * table[n - 1] - math.sqrt((n - 1) / n) * table[n - 2]
    return table


def hermite_psi(n: int, x: Union[float, np.ndarray]) -> np.ndarray:
    """Normalized Hermite function psi_n at x."""
    return hermite_functions(n, x)[n]


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), k=1)


def _reduced_mean_std(reduced: np.ndarray, scale: float) -> tuple:
    a = _ladder(len(reduced))
    position = a + a.T
    mean = scale * float(np.trace(reduced @ position).real)
    second = scale**2 * float(np.trace(reduced @ position @ position).real)
    std = math.sqrt(max(second - mean**2, 0.0))
    return mean, std if std > 0.0 else scale


def _evaluate(reduced: np.ndarray, scale: float, grid: np.ndarray) -> np.ndarray:
    unit = scale * math.sqrt(2.0)
    table = hermite_functions(len(reduced) - 1, grid / unit)
    return np.einsum("mg,mn,ng->g", table, reduced, table).real / unit


@dataclass(frozen=True, eq=False)
class QuadraturePdf:
    """Density of the ideal quadrature on a grid, with the reduced target-mode state it comes from."""

    scale: float
    reduced: np.ndarray
    grid: np.ndarray
    values: np.ndarray

    def cdf(self) -> np.ndarray:
        return ideal_cdf(self)

    def mass(self) -> float:
        return float(trapezoid(self.values, self.grid))

    def cdf_at(self, y: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Interpolated CDF, 0 below and 1 above the grid."""
        return np.interp(y, self.grid, self.cdf(), left=0.0, right=1.0)

    def moment(self, order: int) -> float:
        return float(trapezoid(self.grid**order * self.values, self.grid))

    def expect(self, fn: Callable[[np.ndarray], np.ndarray]) -> Union[float, complex]:
        fvalues = np.broadcast_to(np.asarray(fn(self.grid)), self.grid.shape)
        result = trapezoid(fvalues * self.values, self.grid)
        return complex(result) if np.iscomplexobj(result) else float(result)

    def evaluate(self, y: Union[float, np.ndarray]) -> np.ndarray:
        return _evaluate(self.reduced, self.scale, np.atleast_1d(np.asarray(y, dtype=np.float64)))

    def widened(self, factor: float = 2.0) -> "QuadraturePdf":
        """Same density on a grid widened around its center, with the same spacing density."""
        center = 0.5 * (self.grid[0] + self.grid[-1])
        half = 0.5 * factor * (self.grid[-1] - self.grid[0])
        points = int(math.ceil(factor * (len(self.grid) - 1))) + 1
        grid = np.linspace(center - half, center + half, points)
        return replace(self, grid=grid, values=_evaluate(self.reduced, self.scale, grid))


def default_grid(
    reduced: np.ndarray,
    scale: float,
    points: int = DEFAULT_POINTS,
    width: float = DEFAULT_WIDTH,
) -> np.ndarray:
    """Uniform grid over mean +/- width standard deviations of the ideal quadrature."""
    if points < 2:
        raise ValueError(f"Invalid argument points={points}. (expected at least 2 points)")
    mean, std = _reduced_mean_std(reduced, scale)
    return np.linspace(mean - width * std, mean + width * std, points)


def ideal_pdf(
    state: DensityOperator,
    spec: QuadratureSpec,
    grid: Optional[np.ndarray] = None,
    points: int = DEFAULT_POINTS,
    width: float = DEFAULT_WIDTH,
    frame: Optional[TargetModeFrame] = None,
    verbose: int = 0,
) -> QuadraturePdf:
    """Density of the ideal quadrature q in a state.

    p(y) = 1 / (s sqrt(2)) sum_mn rho'_mn psi_m(y / (s sqrt(2))) psi_n(y / (s sqrt(2))),
    where rho' is the reduced state of the target mode.

    :param state: The state; modes after the signal modes must be in vacuum.
    :param spec: The quadrature spec (delta is not used).
    :param grid: Strictly increasing evaluation points. defaults to points values over mean +/- width std.
    :param points: Number of points of the default grid. defaults to 2001.
    :param width: Half-width of the default grid, in standard deviations. defaults to 8.0.
    :param frame: The target mode frame. defaults to target_mode_frame(spec).
    :param verbose: The verbose level. defaults to 0.
    """
    if frame is None:
        frame = target_mode_frame(spec)
    reduced = rotate_to_target_mode(state, frame, verbose)
    reduced = 0.5 * (reduced + reduced.conj().T)

    if grid is None:
        grid = default_grid(reduced, frame.scale, points, width)
    grid = np.asarray(grid, dtype=np.float64).reshape(-1)
    if len(grid) < 2 or not np.all(np.diff(grid) > 0.0):
        raise ValueError("Invalid argument grid. (expected at least 2 strictly increasing values)")

    values = _evaluate(reduced, frame.scale, grid)
    if verbose >= 2:
        pylog.debug(f"Ideal density on [{grid[0]:.4f}, {grid[-1]:.4f}] with {len(grid)} points.")
    return QuadraturePdf(frame.scale, reduced, grid, values)


def ideal_cdf(pdf: QuadraturePdf) -> np.ndarray:
    """Cumulative trapezoid integral of the density, clamped to [0, 1] and non-decreasing."""
    cdf = cumulative_trapezoid(pdf.values, pdf.grid, initial=0.0)
    return np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)


@dataclass(frozen=True)
class IdealMoment:
    order: int
    value: float
    integrated: float
    contaminated: bool = False

    @property
    def discrepancy(self) -> float:
        return abs(self.value - self.integrated)


def ideal_moments(
    state: DensityOperator,
    spec: QuadratureSpec,
    orders: Sequence[int],
    pdf: Optional[QuadraturePdf] = None,
    verbose: int = 0,
) -> List[IdealMoment]:
    """Moments <q^n> by matrix powers and by integrating the ideal density, which agree within 1e-7.

    :param state: The state.
    :param spec: The quadrature spec.
    :param orders: The moment orders.
    :param pdf: A precomputed ideal density. defaults to ideal_pdf(state, spec).
    :param verbose: The verbose level. defaults to 0.
    """
    if pdf is None:
        pdf = ideal_pdf(state, spec, verbose=verbose)
    quadrature = quadrature_matrix(state.basis, spec)

    moments = []
    for order in orders:
        moment = operator_moment(quadrature, state, order, verbose=verbose)
        result = IdealMoment(order, moment.value, pdf.moment(order), moment.contaminated)
        if result.discrepancy > MOMENT_AGREEMENT_TOL * max(1.0, abs(result.value)):
            pylog.warning(
                f"Ideal moment of order {order} differs between matrix power ({result.value!r}) and integration ({result.integrated!r})."
            )
        moments.append(result)
    return moments


def ideal_bilinear(
    phi: PureState,
    psi: PureState,
    fn: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec,
    grid: Optional[np.ndarray] = None,
    points: int = 4001,
    width: float = DEFAULT_WIDTH,
) -> complex:
    """<phi| f(q) |psi> from the reduced cross operator Tr_rest |psi><phi| and the Hermite kernel."""
    phi.basis.check_same(psi.basis)
    frame = target_mode_frame(spec)
    cross = reduce_cross_operator(phi.ket, psi.ket, phi.basis, frame)

    if grid is None:
        bounds = []
        for state in (phi, psi):
            reduced = rotate_to_target_mode(state.to_density(), frame)
            mean, std = _reduced_mean_std(reduced, frame.scale)
            bounds.extend([mean - width * std, mean + width * std])
        grid = np.linspace(min(bounds), max(bounds), points)

    unit = frame.scale * math.sqrt(2.0)
    table = hermite_functions(len(cross) - 1, grid / unit)
    kernel = np.einsum("mg,mn,ng->g", table, cross, table) / unit
    fvalues = np.broadcast_to(np.asarray(fn(grid)), grid.shape)
    return complex(trapezoid(fvalues * kernel, grid))
