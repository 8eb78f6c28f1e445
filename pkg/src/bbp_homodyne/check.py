#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import math
import tempfile

from argparse import Namespace
from typing import Callable, Dict, List, Tuple

import numpy as np
import yaml

from tqdm import tqdm

from bbp_homodyne.core.convergence import (
    ConvergenceReport,
    build_report,
    polarization_bilinear_check,
    total_variation,
)
from bbp_homodyne.core.fock import FockBasis, operator_moment
from bbp_homodyne.core.measurement import (
    bbp_distribution,
    build_q_delta,
    calorimeter_difference_matrix,
    explicit_lo_distribution,
    quadrature_matrix,
    second_moment_bias,
    skellam_oracle_distribution,
)
from bbp_homodyne.core.optics import QuadratureSpec
from bbp_homodyne.core.scenario import Scenario
from bbp_homodyne.core.states import StateSpec, build_state, pure_state
from bbp_homodyne.run import run_scenario
from bbp_homodyne.utils.files import hash_directory


pylog = logging.getLogger(__name__)


class AcceptanceCard:
    ALPHA: Tuple[complex, ...] = (1j / math.sqrt(2.0),)
    DELTAS: Tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    DETERMINISM_CUTOFF: int = 12
    FAST_MAX_CUTOFF: int = 20
    MULTIMODE_ALPHA: Tuple[complex, ...] = (0.5, 0.5j)
    MULTIMODE_CUTOFF: int = 16
    MULTIMODE_STATE: StateSpec = StateSpec.coherent([0.7, 0.3j])
    MULTIMODE_WEIGHTS: Tuple[float, ...] = (1.0, 2.0)
    ORACLE_CUTOFF: int = 25
    ORACLE_DELTAS: Tuple[float, ...] = (1.0, 0.5)
    ORACLE_GAMMA: float = 0.5
    ORACLE_TV_TOL: float = 1e-6
    OVERLAP_TOL: float = 1e-9
    POLARIZATION_AMPLITUDES: Tuple[complex, complex] = (1.0, -1.0)
    REDUCTION_CUTOFF: int = 8
    REDUCTION_TOL: float = 1e-12
    STATES: Dict[str, StateSpec] = {
        "vacuum": StateSpec.vacuum(),
        "fock_1": StateSpec.fock([1]),
        "coherent_1": StateSpec.coherent([1.0]),
        "even_cat_2": StateSpec.cat([2.0]),
    }
    SCALING_STATES: Tuple[str, ...] = ("coherent_1", "even_cat_2")
    TOTAL_CUTOFF: int = 30
    WEIGHT: float = 1.3
    WORKED_DELTA: float = 0.05
    WORKED_GAMMA: float = 2.0
    WORKED_VALUE: float = 0.0169


def _single_mode_spec(delta: float = AcceptanceCard.DELTAS[0]) -> QuadratureSpec:
    return QuadratureSpec(AcceptanceCard.ALPHA, (AcceptanceCard.WEIGHT,), delta)


def single_mode_reports(verbose: int = 0) -> Dict[str, ConvergenceReport]:
    """Convergence reports of the single-mode acceptance states along the acceptance sweep."""
    basis = FockBasis(2, AcceptanceCard.TOTAL_CUTOFF)
    reports = {}
    for name, state_spec in AcceptanceCard.STATES.items():
        state = build_state(basis, state_spec, 1)
        reports[name], _, _ = build_report(name, state, _single_mode_spec(), AcceptanceCard.DELTAS, verbose=verbose)
    return reports


def check_worked_value(verbose: int = 0) -> bool:
    """Second-moment excess of the coherent state 2 at delta=0.05, omega=1.3: 0.0025 * 1.69 * 4."""
    basis = FockBasis(2, AcceptanceCard.TOTAL_CUTOFF)
    state = build_state(basis, StateSpec.coherent([AcceptanceCard.WORKED_GAMMA]), 1)
    spec = _single_mode_spec(AcceptanceCard.WORKED_DELTA)
    bias = second_moment_bias(state, spec)

    dist = bbp_distribution(state, build_q_delta(basis, spec), validate=True, verbose=verbose)
    quadrature = quadrature_matrix(basis, spec)
    ideal_mean = operator_moment(quadrature, state, 1).value
    ideal_variance = operator_moment(quadrature, state, 2).value - ideal_mean**2
    excess = dist.variance - ideal_variance

    if verbose >= 1:
        pylog.info(f"Worked value: closed form {bias!r}, measured excess {excess!r}.")
    return (
        abs(bias - AcceptanceCard.WORKED_VALUE) <= 1e-12
        and abs(excess - bias) <= 1e-8 * bias
    )


def check_three_paths(verbose: int = 0) -> bool:
    """Displaced frame, explicit local oscillator and Poisson-difference laws agree in total variation."""
    gamma = AcceptanceCard.ORACLE_GAMMA
    signal = StateSpec.coherent([gamma])
    basis = FockBasis(2, AcceptanceCard.ORACLE_CUTOFF)
    state = build_state(basis, signal, 1)

    valid = True
    for delta in AcceptanceCard.ORACLE_DELTAS:
        spec = QuadratureSpec(AcceptanceCard.ALPHA, (1.0,), delta)
        dists = {
            "displaced_frame": bbp_distribution(state, build_q_delta(basis, spec), validate=True, verbose=verbose),
            "explicit_lo": explicit_lo_distribution(signal, spec, AcceptanceCard.ORACLE_CUTOFF, verbose=verbose),
            "skellam": skellam_oracle_distribution(signal, spec),
        }
        names = list(dists.keys())
        for i, first in enumerate(names):
            for second in names[i + 1 :]:
                distance = total_variation(dists[first], dists[second])
                if verbose >= 1:
                    pylog.info(f"TV({first}, {second}) at delta={delta!r}: {distance:.3e}")
                valid = valid and distance <= AcceptanceCard.ORACLE_TV_TOL
    return valid


def check_polarization(verbose: int = 0) -> bool:
    """Bilinear forms between the coherent states 1 and -1: cos gaps decrease, the unit function gives exp(-2)."""
    basis = FockBasis(2, AcceptanceCard.TOTAL_CUTOFF)
    phi, psi = (pure_state(basis, StateSpec.coherent([gamma]), 1) for gamma in AcceptanceCard.POLARIZATION_AMPLITUDES)
    spec = _single_mode_spec()

    cos_records = polarization_bilinear_check(phi, psi, np.cos, spec, AcceptanceCard.DELTAS, verbose)
    gaps = [record["gap"] for record in cos_records]
    decreasing = all(later < earlier for earlier, later in zip(gaps, gaps[1:]))

    unit_records = polarization_bilinear_check(phi, psi, np.ones_like, spec, AcceptanceCard.DELTAS, verbose)
    overlap = math.exp(-2.0)
    exact = all(
        abs(complex(*record["measured"]) - overlap) <= AcceptanceCard.OVERLAP_TOL
        for record in unit_records
    )
    if verbose >= 1:
        pylog.info(f"Polarization cos gaps: {gaps}")
    return decreasing and exact


def check_multimode(verbose: int = 0) -> bool:
    basis = FockBasis(4, AcceptanceCard.MULTIMODE_CUTOFF)
    state = build_state(basis, AcceptanceCard.MULTIMODE_STATE, 2)
    spec = QuadratureSpec(AcceptanceCard.MULTIMODE_ALPHA, AcceptanceCard.MULTIMODE_WEIGHTS, AcceptanceCard.DELTAS[0])
    report, _, _ = build_report("multimode", state, spec, AcceptanceCard.DELTAS, verbose=verbose)
    return report["criteria"]["first_moment_identity"] and report["criteria"]["second_moment_bias"]


def check_unit_weight_reduction(verbose: int = 0) -> bool:
    """With unit weights, q_delta equals the rescaled homodyne difference built from the output modes."""
    valid = True
    for alpha, weights in (
        (AcceptanceCard.ALPHA, (1.0,)),
        (AcceptanceCard.MULTIMODE_ALPHA, (1.0, 1.0)),
    ):
        basis = FockBasis(2 * len(alpha), AcceptanceCard.REDUCTION_CUTOFF)
        for delta in AcceptanceCard.DELTAS:
            spec = QuadratureSpec(alpha, weights, delta)
            difference = build_q_delta(basis, spec).matrix - calorimeter_difference_matrix(basis, spec)
            error = difference.max_abs()
            if verbose >= 2:
                pylog.debug(f"Unit weight reduction error {error:.3e} for {len(alpha)} mode(s) at delta={delta!r}.")
            valid = valid and error <= AcceptanceCard.REDUCTION_TOL
    return valid


def check_determinism(verbose: int = 0) -> bool:
    """Two runs of the same small scenario produce byte-identical files."""
    scenario = Scenario(
        name="determinism",
        signal_modes=1,
        weights=(AcceptanceCard.WEIGHT,),
        alpha=AcceptanceCard.ALPHA,
        state=StateSpec.coherent([1.0]),
        deltas=(0.5, 0.25, 0.125),
        total_cutoff=AcceptanceCard.DETERMINISM_CUTOFF,
    )
    hashes = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmpdir:
            run_scenario(scenario, tmpdir, force=True, verbose=verbose)
            hashes.append(hash_directory(tmpdir))
    return hashes[0] == hashes[1]


def check_acceptance(fast: bool = False, verbose: int = 0) -> Dict[str, bool]:
    """Run the acceptance criteria.

    :param fast: If True, only run the criteria whose bases have a total cutoff <= 20. defaults to False.
    :param verbose: The verbose level. defaults to 0.
    :returns: A dictionary of criterion name to pass (True) or fail (False).
    """
    criteria: List[Tuple[str, int, Callable[[], bool]]] = []

    if not fast:
        reports = {}

        def _report_criterion(name: str, states: Tuple[str, ...] = tuple(AcceptanceCard.STATES)) -> Callable[[], bool]:
            def _check() -> bool:
                if len(reports) == 0:
                    reports.update(single_mode_reports(verbose))
                return all(reports[state]["criteria"][name] for state in states)

            return _check

        def _weak_convergence() -> bool:
            return _report_criterion("kolmogorov_monotone")() and _report_criterion("panel_gap_ratio")()

        criteria += [
            ("first_moment_identity", AcceptanceCard.TOTAL_CUTOFF, _report_criterion("first_moment_identity")),
            ("second_moment_bias", AcceptanceCard.TOTAL_CUTOFF, _report_criterion("second_moment_bias")),
            ("worked_value", AcceptanceCard.TOTAL_CUTOFF, lambda: check_worked_value(verbose)),
            (
                "higher_moment_scaling",
                AcceptanceCard.TOTAL_CUTOFF,
                _report_criterion("higher_moment_scaling", AcceptanceCard.SCALING_STATES),
            ),
            ("three_path_oracle", AcceptanceCard.ORACLE_CUTOFF, lambda: check_three_paths(verbose)),
            ("weak_convergence", AcceptanceCard.TOTAL_CUTOFF, _weak_convergence),
            ("polarization", AcceptanceCard.TOTAL_CUTOFF, lambda: check_polarization(verbose)),
        ]

    criteria += [
        ("multimode", AcceptanceCard.MULTIMODE_CUTOFF, lambda: check_multimode(verbose)),
        ("unit_weight_reduction", AcceptanceCard.REDUCTION_CUTOFF, lambda: check_unit_weight_reduction(verbose)),
        ("determinism", AcceptanceCard.DETERMINISM_CUTOFF, lambda: check_determinism(verbose)),
    ]
    if fast:
        criteria = [item for item in criteria if item[1] <= AcceptanceCard.FAST_MAX_CUTOFF]

    results = {}
    for name, _, check_fn in tqdm(criteria, desc="Checking", disable=verbose < 2):
        try:
            results[name] = bool(check_fn())
        except (ArithmeticError, RuntimeError, ValueError) as err:
            pylog.error(f"Criterion {name} raised {err.__class__.__name__}: {err}")
            results[name] = False
        if verbose >= 1:
            pylog.info(f"Criterion {name}: {'PASS' if results[name] else 'FAIL'}")
    return results


def _main_check(args: Namespace) -> bool:
    results = check_acceptance(args.fast, args.verbose)
    print(yaml.dump({name: "PASS" if valid else "FAIL" for name, valid in results.items()}, sort_keys=False))
    return all(results.values())
