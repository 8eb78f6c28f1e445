#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Homodyne detection with calorimeters: exact BBP outcome laws on truncated Fock spaces.  """


__author__ = "Etienne Labbé (Labbeti)"
__author_email__ = "labbeti.pub@gmail.com"
__license__ = "MIT"
__maintainer__ = "Etienne Labbé (Labbeti)"
__name__ = "bbp-homodyne"
__status__ = "Development"
__version__ = "0.1.0"


from .core.convergence import (
    build_report,
    fit_scaling_exponent,
    moment_sweep,
    polarization_bilinear_check,
    weak_convergence_metrics,
)
from .core.fock import (
    DensityOperator,
    FockBasis,
    OperatorMatrix,
    SpectralDistribution,
    build_basis,
    eigendecompose_hermitian,
    operator_moment,
    spectral_distribution,
)
from .core.measurement import (
    bbp_distribution,
    build_q_delta,
    explicit_lo_distribution,
    outgoing_fock_distribution,
    skellam_oracle_distribution,
)
from .core.optics import QuadratureSpec, rotate_to_target_mode, target_mode_frame
from .core.quadrature import ideal_cdf, ideal_moments, ideal_pdf
from .core.scenario import Scenario, load_scenario, parse_scenario
from .core.states import StateSpec, build_state, coherent_amplitudes_to_state, displacement_matrix
from .utils.limits import (
    get_default_max_dim,
    get_default_sparse_dim,
    set_default_max_dim,
    set_default_sparse_dim,
)


__all__ = [
    "DensityOperator",
    "FockBasis",
    "OperatorMatrix",
    "QuadratureSpec",
    "Scenario",
    "SpectralDistribution",
    "StateSpec",
    "bbp_distribution",
    "build_basis",
    "build_q_delta",
    "build_report",
    "build_state",
    "coherent_amplitudes_to_state",
    "displacement_matrix",
    "eigendecompose_hermitian",
    "explicit_lo_distribution",
    "fit_scaling_exponent",
    "get_default_max_dim",
    "get_default_sparse_dim",
    "ideal_cdf",
    "ideal_moments",
    "ideal_pdf",
    "load_scenario",
    "moment_sweep",
    "operator_moment",
    "outgoing_fock_distribution",
    "parse_scenario",
    "polarization_bilinear_check",
    "rotate_to_target_mode",
    "set_default_max_dim",
    "set_default_sparse_dim",
    "skellam_oracle_distribution",
    "spectral_distribution",
    "target_mode_frame",
    "weak_convergence_metrics",
]
