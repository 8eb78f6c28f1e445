#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Moment sweeps, scaling fits and weak-convergence metrics of BBP distributions towards the ideal quadrature."""

import logging
import math

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from tqdm import tqdm
from typing_extensions import NotRequired, TypedDict

from bbp_homodyne.core.fock import DensityOperator, SpectralDistribution, operator_moment
from bbp_homodyne.core.measurement import (
    MeasurementDistribution,
    bbp_distribution,
    build_q_delta,
    outgoing_fock_distribution,
    second_moment_bias,
    third_moment_bias_coefficient,
)
from bbp_homodyne.core.optics import QuadratureSpec
from bbp_homodyne.core.quadrature import (
    IdealMoment,
    QuadraturePdf,
    ideal_bilinear,
    ideal_moments,
    ideal_pdf,
)
from bbp_homodyne.core.states import PureState
from bbp_homodyne.errors import TruncationError


pylog = logging.getLogger(__name__)

EXACT_TO_PRECISION = "exact-to-precision"
RESIDUAL_FLOOR = 1e-12
MASS_TOL = 1e-8
CROSS_CHECK_TOL = 1e-8
MONOTONE_TOL = 1e-9
DISTRIBUTION_PATHS = ("auto", "displaced_frame", "outgoing_fock")

TestFunction = Callable[[np.ndarray], np.ndarray]

TEST_FUNCTIONS: Dict[str, TestFunction] = {
    "cos_0.5": lambda x: np.cos(0.5 * x),
    "cos_1": lambda x: np.cos(x),
    "cos_2": lambda x: np.cos(2.0 * x),
    "lorentzian": lambda x: 1.0 / (1.0 + x**2),
    "gaussian": lambda x: np.exp(-(x**2)),
}


class MomentRecord(TypedDict):
    order: int
    measured: float
    operator: float
    ideal: float
    residual: Optional[float]
    contaminated: bool


class WeakMetrics(TypedDict):
    kolmogorov_distance: float
    panel_gaps: Dict[str, float]
    grid_widened: bool


class DeltaRecord(TypedDict):
    delta: float
    distribution_path: str
    atoms: int
    truncation_tail: float
    mean_gap: float
    second_moment_bias: float
    variance_excess: float
    bias_error: float
    bias_relative_error: Optional[float]
    third_moment_predicted: float
    moments: List[MomentRecord]
    kolmogorov_distance: NotRequired[float]
    panel_gaps: NotRequired[Dict[str, float]]


class ConvergenceReport(TypedDict):
    name: str
    signal_modes: int
    total_cutoff: int
    basis_size: int
    deltas: List[float]
    ideal_moments: Dict[str, float]
    third_moment_coefficient: float
    records: List[DeltaRecord]
    exponents: Dict[str, Union[float, str, None]]
    criteria: Dict[str, bool]


def total_variation(
    first: SpectralDistribution,
    second: SpectralDistribution,
    atol: float = 1e-6,
) -> float:
    """Half of the l1 distance between two discrete laws, atoms closer than atol being identified."""
    values = np.concatenate([first.values, second.values])
    signed = np.concatenate([first.probabilities, -second.probabilities])
    order = np.argsort(values, kind="stable")
    values, signed = values[order], signed[order]
    if len(values) == 0:
        return 0.0
    starts = np.flatnonzero(np.concatenate([[True], np.diff(values) > atol]))
    return 0.5 * float(np.abs(np.add.reduceat(signed, starts)).sum())


def kolmogorov_distance(dist: SpectralDistribution, pdf: QuadraturePdf) -> float:
    """sup |F_delta - F| evaluated on both sides of every jump of the discrete CDF."""
    cumulative = np.cumsum(dist.probabilities)
    ideal = pdf.cdf_at(dist.values)
    after = np.abs(cumulative - ideal)
    before = np.abs(cumulative - dist.probabilities - ideal)
    return float(max(after.max(initial=0.0), before.max(initial=0.0)))


def weak_convergence_metrics(
    dist: SpectralDistribution,
    pdf: QuadraturePdf,
    test_functions: Optional[Dict[str, TestFunction]] = None,
    mass_tol: float = MASS_TOL,
) -> WeakMetrics:
    """Kolmogorov distance and expectation gaps on a panel of bounded test functions.

    :param dist: The BBP outcome distribution.
    :param pdf: The ideal density. Its grid is widened once when it misses more than mass_tol probability.
    :param test_functions: Named test functions. defaults to TEST_FUNCTIONS.
    :param mass_tol: Tolerated ideal probability outside of the grid. defaults to 1e-8.
    """
    if test_functions is None:
        test_functions = TEST_FUNCTIONS

    widened = False
    if abs(1.0 - pdf.mass()) > mass_tol:
        pdf = pdf.widened()
        widened = True
        if abs(1.0 - pdf.mass()) > mass_tol:
            raise TruncationError(
                f"Ideal density grid misses probability {1.0 - pdf.mass():.3e} after widening. (expected <= {mass_tol:.0e})"
            )

    gaps = {
        name: float(abs(dist.expect(fn) - pdf.expect(fn)))
        for name, fn in test_functions.items()
    }
    return WeakMetrics(
        kolmogorov_distance=kolmogorov_distance(dist, pdf),
        panel_gaps=gaps,
        grid_widened=widened,
    )


def fit_scaling_exponent(
    deltas: Sequence[float],
    residuals: Sequence[float],
    floor: float = RESIDUAL_FLOOR,
) -> Union[float, str]:
    """Least-squares slope of log|r| against log(delta).

    :returns: The slope, or EXACT_TO_PRECISION when every residual is below floor.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    residuals = np.abs(np.asarray(residuals, dtype=np.float64))
    if len(deltas) != len(residuals) or len(deltas) < 3:
        raise ValueError(
            f"Invalid arguments with {len(deltas)} deltas and {len(residuals)} residuals. (expected at least 3 pairs)"
        )
    if np.all(residuals <= floor):
        return EXACT_TO_PRECISION
    if np.any(residuals <= floor) or np.any(deltas <= 0.0):
        raise ValueError(
            f"Invalid residuals {residuals.tolist()}. (expected all residuals above floor={floor} or all below)"
        )
    slope, _ = np.polyfit(np.log(deltas), np.log(residuals), 1)
    return float(slope)


def resolve_distribution_path(path: str, spec: QuadratureSpec) -> str:
    if path not in DISTRIBUTION_PATHS:
        raise ValueError(f"Invalid argument path={path}. (expected one of {DISTRIBUTION_PATHS})")
    if path == "auto":
        return "outgoing_fock" if spec.mode_count == 1 else "displaced_frame"
    if path == "outgoing_fock" and spec.mode_count != 1:
        raise ValueError(
            f"Invalid distribution path {path} for {spec.mode_count} signal modes. (expected a single signal mode)"
        )
    return path


def analyze_delta(
    state: DensityOperator,
    spec: QuadratureSpec,
    ideal: Dict[int, IdealMoment],
    pdf: QuadraturePdf,
    max_order: int = 4,
    distribution: str = "auto",
    third_moment_coefficient: float = 0.0,
    verbose: int = 0,
) -> Tuple[DeltaRecord, MeasurementDistribution]:
    """Moments, bias identities and weak metrics of q_delta at the coupling of spec.

    :returns: The record and the distribution used for the weak metrics.
    """
    path = resolve_distribution_path(distribution, spec)
    op = build_q_delta(state.basis, spec)
    dist = bbp_distribution(state, op, verbose=verbose)

    moments = []
    for order in range(1, max_order + 1):
        moment = operator_moment(op.matrix, state, order, verbose=verbose)
        measured = dist.moment(order)
        if abs(measured - moment.value) > CROSS_CHECK_TOL * max(1.0, abs(moment.value)):
            pylog.warning(
                f"Moment of order {order} at delta={spec.delta!r} differs between distribution ({measured!r}) and operator powers ({moment.value!r})."
            )
        contaminated = moment.contaminated or ideal[order].contaminated
        if contaminated:
            pylog.warning(f"Excluding moment of order {order} at delta={spec.delta!r}: truncation contaminated.")
        moments.append(
            MomentRecord(
                order=order,
                measured=measured,
                operator=moment.value,
                ideal=ideal[order].value,
                residual=None if contaminated else measured - ideal[order].value,
                contaminated=contaminated,
            )
        )

    bias = second_moment_bias(state, spec)
    ideal_variance = ideal[2].value - ideal[1].value ** 2
    excess = dist.variance - ideal_variance
    record = DeltaRecord(
        delta=spec.delta,
        distribution_path=path,
        atoms=len(dist),
        truncation_tail=dist.truncation_tail,
        mean_gap=abs(dist.mean - ideal[1].value),
        second_moment_bias=bias,
        variance_excess=excess,
        bias_error=abs(excess - bias),
        bias_relative_error=abs(excess - bias) / bias if bias > 0.0 else None,
        third_moment_predicted=third_moment_coefficient * spec.delta**2,
        moments=moments,
    )

    weak_dist = outgoing_fock_distribution(state, spec, verbose) if path == "outgoing_fock" else dist
    metrics = weak_convergence_metrics(weak_dist, pdf)
    record["kolmogorov_distance"] = metrics["kolmogorov_distance"]
    record["panel_gaps"] = metrics["panel_gaps"]
    return record, weak_dist


def moment_sweep(
    state: DensityOperator,
    spec: QuadratureSpec,
    deltas: Sequence[float],
    max_order: int = 4,
    distribution: str = "auto",
    pdf: Optional[QuadraturePdf] = None,
    workers: int = 1,
    verbose: int = 0,
) -> Tuple[List[DeltaRecord], List[MeasurementDistribution], QuadraturePdf, Dict[int, IdealMoment]]:
    """Run :func:`analyze_delta` over a sequence of couplings, in the given order.

    :param state: The joint state with vacuum local oscillators.
    :param spec: The quadrature spec; its delta is replaced by each value of deltas.
    :param deltas: The couplings.
    :param max_order: The highest moment order. defaults to 4.
    :param distribution: "auto", "displaced_frame" or "outgoing_fock". defaults to "auto".
    :param pdf: The ideal density. defaults to ideal_pdf(state, spec) on its default grid.
    :param workers: Number of threads used over deltas. defaults to 1.
    :param verbose: The verbose level. defaults to 0.
    """
    if max_order < 2:
        raise ValueError(f"Invalid argument max_order={max_order}. (expected at least 2)")
    if len(deltas) == 0 or any(later >= earlier for earlier, later in zip(deltas, deltas[1:])):
        raise ValueError(f"Invalid argument deltas={list(deltas)}. (expected a non-empty strictly decreasing sequence)")

    if pdf is None:
        pdf = ideal_pdf(state, spec, verbose=verbose)
    ideal = {m.order: m for m in ideal_moments(state, spec, range(1, max_order + 1), pdf, verbose)}
    coefficient = third_moment_bias_coefficient(state, spec)

    def _analyze(delta: float) -> Tuple[DeltaRecord, MeasurementDistribution]:
        return analyze_delta(
            state,
            spec.with_delta(delta),
            ideal,
            pdf,
            max_order,
            distribution,
            coefficient,
            verbose,
        )

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as executor:
        results = list(
            tqdm(
                executor.map(_analyze, deltas),
                total=len(deltas),
                desc="Sweeping delta",
                disable=verbose < 2,
            )
        )

    records = [record for record, _ in results]
    dists = [dist for _, dist in results]
    return records, dists, pdf, ideal


def fit_exponents(records: Sequence[DeltaRecord], max_order: int) -> Dict[str, Union[float, str, None]]:
    """Scaling exponent of every moment residual; None when fewer than 3 uncontaminated couplings remain."""
    exponents: Dict[str, Union[float, str, None]] = {}
    for order in range(1, max_order + 1):
        pairs = [
            (record["delta"], record["moments"][order - 1]["residual"])
            for record in records
            if record["moments"][order - 1]["residual"] is not None
        ]
        if len(pairs) < 3:
            exponents[str(order)] = None
            continue
        deltas, residuals = zip(*pairs)
        try:
            exponents[str(order)] = fit_scaling_exponent(deltas, residuals)
        except ValueError as err:
            pylog.warning(f"Cannot fit the scaling of order {order}: {err}")
            exponents[str(order)] = None
    return exponents


def evaluate_criteria(
    records: Sequence[DeltaRecord],
    exponents: Dict[str, Union[float, str, None]],
) -> Dict[str, bool]:
    """Check the exact moment identities and the convergence rates on a sweep."""
    by_delta = sorted(records, key=lambda record: record["delta"], reverse=True)

    first = all(record["mean_gap"] <= 1e-9 for record in records)
    second = all(
        record["bias_error"] <= 1e-12
        if record["bias_relative_error"] is None
        else record["bias_relative_error"] <= 1e-8
        for record in records
    )
    scaling = all(
        value == EXACT_TO_PRECISION or (isinstance(value, float) and 1.8 <= value <= 2.2)
        for order, value in exponents.items()
        if int(order) >= 3 and value is not None
    )

    distances = [record.get("kolmogorov_distance", math.nan) for record in by_delta]
    monotone = all(later <= earlier + MONOTONE_TOL for earlier, later in zip(distances, distances[1:]))

    panel = True
    if len(by_delta) >= 2:
        largest, smallest = by_delta[0]["panel_gaps"], by_delta[-1]["panel_gaps"]
        panel = all(smallest[name] <= 0.2 * largest[name] + 1e-12 for name in largest)

    return {
        "first_moment_identity": first,
        "second_moment_bias": second,
        "higher_moment_scaling": scaling,
        "kolmogorov_monotone": monotone,
        "panel_gap_ratio": panel,
    }


def build_report(
    name: str,
    state: DensityOperator,
    spec: QuadratureSpec,
    deltas: Sequence[float],
    max_order: int = 4,
    distribution: str = "auto",
    pdf: Optional[QuadraturePdf] = None,
    workers: int = 1,
    verbose: int = 0,
) -> Tuple[ConvergenceReport, List[MeasurementDistribution], QuadraturePdf]:
    """Full convergence study of one state: sweep, exponent fits and criteria."""
    records, dists, pdf, ideal = moment_sweep(
        state, spec, deltas, max_order, distribution, pdf, workers, verbose
    )
    exponents = fit_exponents(records, max_order)
    report = ConvergenceReport(
        name=name,
        signal_modes=spec.mode_count,
        total_cutoff=state.basis.total_cutoff,
        basis_size=state.basis.size,
        deltas=[float(delta) for delta in deltas],
        ideal_moments={str(order): moment.value for order, moment in ideal.items()},
        third_moment_coefficient=third_moment_bias_coefficient(state, spec),
        records=records,
        exponents=exponents,
        criteria=evaluate_criteria(records, exponents),
    )
    if verbose >= 1:
        pylog.info(f"Criteria for '{name}': {report['criteria']}")
    return report, dists, pdf


class BilinearRecord(TypedDict):
    delta: float
    measured: Tuple[float, float]
    ideal: Tuple[float, float]
    gap: float


def polarization_bilinear_check(
    phi: PureState,
    psi: PureState,
    fn: TestFunction,
    spec: QuadratureSpec,
    deltas: Sequence[float],
    verbose: int = 0,
) -> List[BilinearRecord]:
    """Compare <phi| f(q_delta) |psi>, assembled from four diagonal laws, with <phi| f(q) |psi>.

    Uses <phi|A|psi> = 1/4 sum_j (-i)^j <rho_j|A|rho_j> with rho_j = phi + i^j psi, each diagonal
    term being the expectation of f under the spectral law of the normalized rho_j times its squared norm.
    """
    phi.basis.check_same(psi.basis)
    basis = phi.basis
    ideal = ideal_bilinear(phi, psi, fn, spec)

    records = []
    for delta in deltas:
        op = build_q_delta(basis, spec.with_delta(delta))
        value = 0.0j
        for j in range(4):
            ket = phi.ket + (1j**j) * psi.ket
            norm2 = float(np.vdot(ket, ket).real)
            if norm2 == 0.0:
                continue
            state = DensityOperator.from_ket(basis, ket / math.sqrt(norm2))
            value += (-1j) ** j * norm2 * bbp_distribution(state, op, verbose=verbose).expect(fn)
        value /= 4.0
        records.append(
            BilinearRecord(
                delta=float(delta),
                measured=(value.real, value.imag),
                ideal=(ideal.real, ideal.imag),
                gap=abs(value - ideal),
            )
        )
    return records
