#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Scenario files: JSON description of a signal state, a quadrature and a sweep of couplings.

Complex numbers are written as [re, im] pairs (a plain number is read as a real value).
"""

import json
import logging

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from bbp_homodyne.core.convergence import DISTRIBUTION_PATHS
from bbp_homodyne.core.fock import DensityOperator, FockBasis
from bbp_homodyne.core.optics import QuadratureSpec
from bbp_homodyne.core.quadrature import DEFAULT_POINTS, DEFAULT_WIDTH
from bbp_homodyne.core.states import StateSpec, build_state
from bbp_homodyne.errors import ScenarioError


pylog = logging.getLogger(__name__)


class ScenarioCard:
    DEFAULT_DISTRIBUTION: str = "auto"
    DEFAULT_GRID: str = "auto"
    DEFAULT_MAX_ORDER: int = 4
    DEFAULT_TOTAL_CUTOFF: int = 25
    KEYS: Tuple[str, ...] = (
        "name",
        "signal_modes",
        "weights",
        "alpha",
        "state",
        "deltas",
        "total_cutoff",
        "grid",
        "outputs",
        "max_order",
        "distribution",
    )
    MAX_ORDER_RANGE: Tuple[int, int] = (2, 6)
    OUTPUTS: Tuple[str, ...] = ("distributions", "ideal_pdf", "report", "plotdata")
    REQUIRED_KEYS: Tuple[str, ...] = ("name", "weights", "alpha", "state", "deltas")
    STATE_KINDS: Tuple[str, ...] = StateSpec.KINDS + ("cat",)


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid of the ideal density: automatic (points, width) or explicit bounds."""

    points: int = DEFAULT_POINTS
    width: float = DEFAULT_WIDTH
    start: Optional[float] = None
    stop: Optional[float] = None

    @property
    def is_auto(self) -> bool:
        return self.start is None

    def explicit(self) -> Optional[np.ndarray]:
        if self.is_auto:
            return None
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class Scenario:
    name: str
    signal_modes: int
    weights: Tuple[float, ...]
    alpha: Tuple[complex, ...]
    state: StateSpec
    deltas: Tuple[float, ...]
    total_cutoff: int = ScenarioCard.DEFAULT_TOTAL_CUTOFF
    grid: GridSpec = GridSpec()
    outputs: Tuple[str, ...] = ScenarioCard.OUTPUTS
    max_order: int = ScenarioCard.DEFAULT_MAX_ORDER
    distribution: str = ScenarioCard.DEFAULT_DISTRIBUTION

    def quadrature_spec(self, delta: Optional[float] = None) -> QuadratureSpec:
        """Quadrature spec at a coupling. defaults to the first (largest) delta."""
        if delta is None:
            delta = self.deltas[0]
        return QuadratureSpec(self.alpha, self.weights, delta)

    def basis(self, verbose: int = 0) -> FockBasis:
        return FockBasis(2 * self.signal_modes, self.total_cutoff, verbose=verbose)

    def build_state(self, verbose: int = 0) -> DensityOperator:
        """Signal state on the joint basis, local oscillators in vacuum."""
        return build_state(self.basis(verbose), self.state, self.signal_modes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "signal_modes": self.signal_modes,
            "weights": list(self.weights),
            "alpha": [_dump_complex(a) for a in self.alpha],
            "state": _dump_state(self.state),
            "deltas": list(self.deltas),
            "total_cutoff": self.total_cutoff,
            "grid": "auto" if self.grid == GridSpec() else _dump_grid(self.grid),
            "outputs": list(self.outputs),
            "max_order": self.max_order,
            "distribution": self.distribution,
        }


def load_scenario(fpath: Union[str, Path]) -> Scenario:
    """Read and validate a scenario file (UTF-8 JSON).

    :raises FileNotFoundError: if fpath does not exist.
    :raises ScenarioError: if the content is not a valid scenario.
    """
    fpath = Path(fpath)
    if not fpath.is_file():
        raise FileNotFoundError(f"Cannot find scenario file '{fpath}'.")
    return parse_scenario(fpath.read_text(encoding="utf-8"))


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario from JSON text.

    >>> parse_scenario('{"name": "vac", "weights": [1.0], "alpha": [[0.0, 1.0]], "state": {"kind": "vacuum"}, "deltas": [0.5, 0.25]}').total_cutoff
    25
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"Invalid JSON: {err.msg} at line {err.lineno} column {err.colno}.")

    if not isinstance(data, dict):
        raise ScenarioError("Invalid scenario. (expected a JSON object)")
    for key in data:
        if key not in ScenarioCard.KEYS:
            raise ScenarioError(
                f"Unknown key '{key}'. (expected one of {ScenarioCard.KEYS})", f"$.{key}"
            )
    for key in ScenarioCard.REQUIRED_KEYS:
        if key not in data:
            raise ScenarioError(f"Missing required key '{key}'.", f"$.{key}")

    name = data["name"]
    if not isinstance(name, str) or name == "":
        raise ScenarioError("Invalid name. (expected a non-empty string)", "$.name")

    weights = tuple(_parse_real(w, f"$.weights[{i}]") for i, w in enumerate(_parse_list(data["weights"], "$.weights")))
    if len(weights) == 0:
        raise ScenarioError("Invalid weights. (expected at least one weight)", "$.weights")
    for i, weight in enumerate(weights):
        if weight <= 0.0:
            raise ScenarioError(f"Invalid weight {weight}. (weights strictly positive)", f"$.weights[{i}]")

    signal_modes = data.get("signal_modes", len(weights))
    if not _is_int(signal_modes) or signal_modes < 1:
        raise ScenarioError(f"Invalid signal_modes={signal_modes}. (expected a positive integer)", "$.signal_modes")
    if len(weights) != signal_modes:
        raise ScenarioError(
            f"Invalid weights of length {len(weights)}. (expected one weight per signal mode, i.e. {signal_modes})",
            "$.weights",
        )

    alpha = tuple(_parse_complex(a, f"$.alpha[{i}]") for i, a in enumerate(_parse_list(data["alpha"], "$.alpha")))
    if len(alpha) != signal_modes:
        raise ScenarioError(
            f"Invalid alpha of length {len(alpha)}. (expected one amplitude per signal mode, i.e. {signal_modes})",
            "$.alpha",
        )
    if all(a == 0 for a in alpha):
        raise ScenarioError("Invalid alpha. (expected at least one non-zero amplitude)", "$.alpha")

    deltas = tuple(_parse_real(d, f"$.deltas[{i}]") for i, d in enumerate(_parse_list(data["deltas"], "$.deltas")))
    if len(deltas) == 0:
        raise ScenarioError("Invalid deltas. (expected at least one coupling)", "$.deltas")
    for i, delta in enumerate(deltas):
        if not (np.isfinite(delta) and delta > 0.0):
            raise ScenarioError(f"Invalid delta {delta}. (expected a finite strictly positive coupling)", f"$.deltas[{i}]")
    for i in range(1, len(deltas)):
        if deltas[i] >= deltas[i - 1]:
            raise ScenarioError(
                f"Invalid delta {deltas[i]} after {deltas[i - 1]}. (deltas strictly decreasing)", f"$.deltas[{i}]"
            )

    total_cutoff = data.get("total_cutoff", ScenarioCard.DEFAULT_TOTAL_CUTOFF)
    if not _is_int(total_cutoff) or total_cutoff < 1:
        raise ScenarioError(f"Invalid total_cutoff={total_cutoff}. (expected a positive integer)", "$.total_cutoff")

    max_order = data.get("max_order", ScenarioCard.DEFAULT_MAX_ORDER)
    low, high = ScenarioCard.MAX_ORDER_RANGE
    if not _is_int(max_order) or not (low <= max_order <= high):
        raise ScenarioError(f"Invalid max_order={max_order}. (expected an integer in [{low}, {high}])", "$.max_order")

    distribution = data.get("distribution", ScenarioCard.DEFAULT_DISTRIBUTION)
    if distribution not in DISTRIBUTION_PATHS:
        raise ScenarioError(f"Invalid distribution={distribution}. (expected one of {DISTRIBUTION_PATHS})", "$.distribution")
    if distribution == "outgoing_fock" and signal_modes != 1:
        raise ScenarioError(
            f"Invalid distribution={distribution} for {signal_modes} signal modes. (expected a single signal mode)",
            "$.distribution",
        )

    outputs = data.get("outputs", list(ScenarioCard.OUTPUTS))
    outputs = tuple(_parse_list(outputs, "$.outputs"))
    for i, output in enumerate(outputs):
        if output not in ScenarioCard.OUTPUTS:
            raise ScenarioError(f"Invalid output {output!r}. (expected one of {ScenarioCard.OUTPUTS})", f"$.outputs[{i}]")

    state = _parse_state(data["state"], "$.state")
    try:
        state_modes = state.mode_count
    except ValueError as err:
        raise ScenarioError(str(err), "$.state")
    if state_modes not in (None, signal_modes):
        raise ScenarioError(
            f"Invalid state on {state_modes} modes. (expected {signal_modes} signal modes)", "$.state"
        )

    return Scenario(
        name=name,
        signal_modes=signal_modes,
        weights=weights,
        alpha=alpha,
        state=state,
        deltas=deltas,
        total_cutoff=total_cutoff,
        grid=_parse_grid(data.get("grid", ScenarioCard.DEFAULT_GRID), "$.grid"),
        outputs=outputs,
        max_order=max_order,
        distribution=distribution,
    )


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _parse_list(value: Any, path: str) -> List[Any]:
    if not isinstance(value, list):
        raise ScenarioError(f"Invalid value {value!r}. (expected a list)", path)
    return value


def _parse_real(value: Any, path: str) -> float:
    if not _is_number(value):
        raise ScenarioError(f"Invalid value {value!r}. (expected a number)", path)
    return float(value)


def _parse_complex(value: Any, path: str) -> complex:
    if _is_number(value):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value):
        return complex(float(value[0]), float(value[1]))
    raise ScenarioError(f"Invalid complex value {value!r}. (expected a number or a [re, im] pair)", path)


def _parse_mapping(value: Any, path: str, allowed: Tuple[str, ...], required: Tuple[str, ...]) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise ScenarioError(f"Invalid value {value!r}. (expected a JSON object)", path)
    for key in value:
        if key not in allowed:
            raise ScenarioError(f"Unknown key '{key}'. (expected one of {allowed})", f"{path}.{key}")
    for key in required:
        if key not in value:
            raise ScenarioError(f"Missing required key '{key}'.", f"{path}.{key}")
    return value


def _parse_occupations(value: Any, path: str) -> Tuple[int, ...]:
    occupations = _parse_list(value, path)
    for i, n in enumerate(occupations):
        if not _is_int(n) or n < 0:
            raise ScenarioError(f"Invalid occupation {n!r}. (expected a non-negative integer)", f"{path}[{i}]")
    return tuple(occupations)


def _parse_amplitudes(value: Any, path: str) -> Tuple[complex, ...]:
    return tuple(_parse_complex(a, f"{path}[{i}]") for i, a in enumerate(_parse_list(value, path)))


def _parse_state(value: Any, path: str) -> StateSpec:
    if not isinstance(value, dict) or "kind" not in value:
        raise ScenarioError("Invalid state. (expected a JSON object with a 'kind' key)", path)
    kind = value["kind"]
    if kind not in ScenarioCard.STATE_KINDS:
        raise ScenarioError(f"Invalid state kind {kind!r}. (expected one of {ScenarioCard.STATE_KINDS})", f"{path}.kind")

    if kind == "vacuum":
        _parse_mapping(value, path, ("kind",), ())
        return StateSpec.vacuum()

    elif kind == "fock":
        _parse_mapping(value, path, ("kind", "occupations"), ("occupations",))
        return StateSpec.fock(_parse_occupations(value["occupations"], f"{path}.occupations"))

    elif kind == "coherent":
        _parse_mapping(value, path, ("kind", "amplitudes"), ("amplitudes",))
        return StateSpec.coherent(_parse_amplitudes(value["amplitudes"], f"{path}.amplitudes"))

    elif kind == "cat":
        _parse_mapping(value, path, ("kind", "amplitudes", "parity"), ("amplitudes",))
        parity = value.get("parity", 1)
        if parity not in (1, -1) or isinstance(parity, bool):
            raise ScenarioError(f"Invalid parity {parity!r}. (expected 1 or -1)", f"{path}.parity")
        return StateSpec.cat(_parse_amplitudes(value["amplitudes"], f"{path}.amplitudes"), parity)

    elif kind in ("coherent_superposition", "fock_superposition"):
        vector_key = "amplitudes" if kind == "coherent_superposition" else "occupations"
        _parse_mapping(value, path, ("kind", "terms"), ("terms",))
        terms = []
        for i, term in enumerate(_parse_list(value["terms"], f"{path}.terms")):
            term_path = f"{path}.terms[{i}]"
            _parse_mapping(term, term_path, ("coefficient", vector_key), ("coefficient", vector_key))
            coefficient = _parse_complex(term["coefficient"], f"{term_path}.coefficient")
            if kind == "coherent_superposition":
                vector = _parse_amplitudes(term[vector_key], f"{term_path}.{vector_key}")
            else:
                vector = _parse_occupations(term[vector_key], f"{term_path}.{vector_key}")
            terms.append((coefficient, vector))
        try:
            if kind == "coherent_superposition":
                return StateSpec.coherent_superposition(terms)
            return StateSpec.fock_superposition(terms)
        except ValueError as err:
            raise ScenarioError(str(err), f"{path}.terms")

    else:
        _parse_mapping(value, path, ("kind", "factors"), ("factors",))
        factors = [
            _parse_state(factor, f"{path}.factors[{i}]")
            for i, factor in enumerate(_parse_list(value["factors"], f"{path}.factors"))
        ]
        try:
            return StateSpec.product(factors)
        except ValueError as err:
            raise ScenarioError(str(err), f"{path}.factors")


def _parse_grid(value: Any, path: str) -> GridSpec:
    if value == "auto":
        return GridSpec()
    grid = _parse_mapping(value, path, ("points", "width", "start", "stop"), ())
    points = grid.get("points", DEFAULT_POINTS)
    if not _is_int(points) or points < 2:
        raise ScenarioError(f"Invalid points={points!r}. (expected an integer >= 2)", f"{path}.points")

    if "start" in grid or "stop" in grid:
        if "width" in grid:
            raise ScenarioError("Invalid grid. (expected either width or start/stop)", f"{path}.width")
        start = _parse_real(grid.get("start"), f"{path}.start")
        stop = _parse_real(grid.get("stop"), f"{path}.stop")
        if stop <= start:
            raise ScenarioError(f"Invalid grid bounds [{start}, {stop}]. (expected start < stop)", path)
        return GridSpec(points=points, start=start, stop=stop)

    width = _parse_real(grid.get("width", DEFAULT_WIDTH), f"{path}.width")
    if width <= 0.0:
        raise ScenarioError(f"Invalid width={width}. (expected a positive number)", f"{path}.width")
    return GridSpec(points=points, width=width)


def _dump_complex(value: complex) -> List[float]:
    return [value.real, value.imag]


def _dump_grid(grid: GridSpec) -> Dict[str, Any]:
    if grid.is_auto:
        return {"points": grid.points, "width": grid.width}
    return {"points": grid.points, "start": grid.start, "stop": grid.stop}


def _dump_state(state: StateSpec) -> Dict[str, Any]:
    if state.kind == "vacuum":
        return {"kind": "vacuum"}
    elif state.kind == "fock":
        return {"kind": "fock", "occupations": list(state.occupations)}
    elif state.kind == "coherent":
        return {"kind": "coherent", "amplitudes": [_dump_complex(a) for a in state.amplitudes]}
    elif state.kind == "coherent_superposition":
        return {
            "kind": state.kind,
            "terms": [
                {"coefficient": _dump_complex(c), "amplitudes": [_dump_complex(a) for a in amps]}
                for c, amps in state.terms
            ],
        }
    elif state.kind == "fock_superposition":
        return {
            "kind": state.kind,
            "terms": [{"coefficient": _dump_complex(c), "occupations": list(occ)} for c, occ in state.terms],
        }
    else:
        return {"kind": "product", "factors": [_dump_state(factor) for factor in state.factors]}
