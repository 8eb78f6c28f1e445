#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import os
import os.path as osp

from argparse import Namespace
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import yaml

from bbp_homodyne.core.convergence import ConvergenceReport, build_report
from bbp_homodyne.core.fock import SpectralDistribution
from bbp_homodyne.core.measurement import (
    MeasurementDistribution,
    explicit_lo_distribution,
    outgoing_fock_distribution,
    skellam_oracle_distribution,
)
from bbp_homodyne.core.quadrature import QuadraturePdf, ideal_pdf
from bbp_homodyne.core.scenario import Scenario
from bbp_homodyne.utils.files import format_delta, remove_outputs, write_csv, write_json


pylog = logging.getLogger(__name__)

IDEAL_PDF_FNAME = "ideal_pdf.csv"
REPORT_FNAME = "report.json"
PLOTDATA_FNAME = "plotdata_cdf.csv"
ORACLE_KINDS = ("skellam", "explicit-lo", "hermite", "outgoing-fock")
DISTRIBUTION_ORACLES = ("skellam", "explicit-lo", "outgoing-fock")


def distribution_fname(delta: float) -> str:
    return f"distribution_delta={format_delta(delta)}.csv"


def output_fnames(scenario: Scenario) -> List[str]:
    """Names of the files written by :func:`run_scenario`, in writing order."""
    fnames = []
    if "distributions" in scenario.outputs:
        fnames += [distribution_fname(delta) for delta in scenario.deltas]
    if "ideal_pdf" in scenario.outputs:
        fnames.append(IDEAL_PDF_FNAME)
    if "report" in scenario.outputs:
        fnames.append(REPORT_FNAME)
    if "plotdata" in scenario.outputs:
        fnames.append(PLOTDATA_FNAME)
    return fnames


def write_distribution(fpath: Union[str, Path], dist: SpectralDistribution) -> str:
    return write_csv(fpath, ("value", "probability"), (dist.values, dist.probabilities))


def write_ideal_pdf(fpath: Union[str, Path], pdf: QuadraturePdf) -> str:
    return write_csv(fpath, ("y", "pdf", "cdf"), (pdf.grid, pdf.values, pdf.cdf()))


def write_plotdata(
    fpath: Union[str, Path],
    pdf: QuadraturePdf,
    dists: Sequence[MeasurementDistribution],
) -> str:
    """Every CDF evaluated on the grid of the ideal density."""
    fieldnames = ["y", "ideal_cdf"] + [f"cdf_delta={format_delta(dist.delta)}" for dist in dists]
    columns = [pdf.grid, pdf.cdf()] + [np.asarray(dist.cdf_at(pdf.grid)) for dist in dists]
    return write_csv(fpath, fieldnames, columns)


def _prepare_out_dir(out_dir: Path, fnames: Sequence[str], force: bool) -> bool:
    if out_dir.exists() and not out_dir.is_dir():
        raise NotADirectoryError(f"Invalid output path '{out_dir}'. (expected a directory)")
    existing = [fname for fname in fnames if osp.exists(out_dir.joinpath(fname))]
    if len(existing) > 0 and not force:
        raise FileExistsError(
            f"Cannot write outputs in '{out_dir}': {existing} already exist. (use --force true to overwrite)"
        )
    created = not out_dir.exists()
    os.makedirs(out_dir, exist_ok=True)
    return created


def run_scenario(
    scenario: Scenario,
    out_dir: Union[str, Path],
    force: bool = False,
    workers: int = 1,
    verbose: int = 0,
) -> ConvergenceReport:
    """Run the convergence study of a scenario and write its outputs.

    Written files: one ``distribution_delta=<delta>.csv`` per coupling (value,probability),
    ``ideal_pdf.csv`` (y,pdf,cdf), ``report.json`` and ``plotdata_cdf.csv``, restricted to the
    scenario outputs. On failure, the files already written are removed.

    :param scenario: The validated scenario.
    :param out_dir: The output directory, created if needed.
    :param force: If True, overwrite existing outputs. defaults to False.
    :param workers: Number of threads used over the couplings. defaults to 1.
    :param verbose: The verbose level. defaults to 0.
    :returns: The convergence report.
    """
    out_dir = Path(out_dir)
    fnames = output_fnames(scenario)
    created = _prepare_out_dir(out_dir, fnames, force)

    written = []
    try:
        state = scenario.build_state(verbose)
        spec = scenario.quadrature_spec()
        pdf = ideal_pdf(
            state,
            spec,
            grid=scenario.grid.explicit(),
            points=scenario.grid.points,
            width=scenario.grid.width,
            verbose=verbose,
        )
        report, dists, pdf = build_report(
            scenario.name,
            state,
            spec,
            scenario.deltas,
            scenario.max_order,
            scenario.distribution,
            pdf,
            workers,
            verbose,
        )

        if "distributions" in scenario.outputs:
            for dist in dists:
                fpath = out_dir.joinpath(distribution_fname(dist.delta))
                written.append(fpath)
                write_distribution(fpath, dist)
        if "ideal_pdf" in scenario.outputs:
            written.append(out_dir.joinpath(IDEAL_PDF_FNAME))
            write_ideal_pdf(written[-1], pdf)
        if "report" in scenario.outputs:
            written.append(out_dir.joinpath(REPORT_FNAME))
            write_json(written[-1], report)
        if "plotdata" in scenario.outputs:
            written.append(out_dir.joinpath(PLOTDATA_FNAME))
            write_plotdata(written[-1], pdf, dists)

    except BaseException:
        deleted = remove_outputs(written, out_dir if created else None, rm_root=created)
        if verbose >= 1:
            pylog.info(f"Removed {len(deleted)} partial output(s) of scenario '{scenario.name}'.")
        raise

    if verbose >= 1:
        pylog.info(f"Scenario '{scenario.name}' written in '{out_dir}' ({len(written)} files).")
    return report


def oracle_distributions(
    scenario: Scenario,
    kind: str,
    verbose: int = 0,
) -> List[MeasurementDistribution]:
    """Outcome laws of a scenario along its couplings by one independent oracle path.

    :param scenario: The scenario.
    :param kind: "skellam" (product coherent signals), "explicit-lo" or "outgoing-fock" (single signal mode).
    :param verbose: The verbose level. defaults to 0.
    """
    if kind == "skellam":
        return [
            skellam_oracle_distribution(scenario.state, scenario.quadrature_spec(delta))
            for delta in scenario.deltas
        ]
    elif kind == "explicit-lo":
        return [
            explicit_lo_distribution(scenario.state, scenario.quadrature_spec(delta), scenario.total_cutoff, verbose=verbose)
            for delta in scenario.deltas
        ]
    elif kind == "outgoing-fock":
        state = scenario.build_state(verbose)
        return [
            outgoing_fock_distribution(state, scenario.quadrature_spec(delta), verbose)
            for delta in scenario.deltas
        ]
    else:
        raise ValueError(f"Invalid argument kind={kind}. (expected one of {DISTRIBUTION_ORACLES})")


def run_oracle(
    scenario: Scenario,
    kind: str,
    out_dir: Union[str, Path, None] = None,
    force: bool = False,
    verbose: int = 0,
) -> Dict[str, Dict[str, float]]:
    """Run a single oracle path for debugging.

    Distributions are written with the schema of :func:`run_scenario` ("hermite" writes the ideal density).

    :returns: A summary (atoms, total mass, mean and variance) per output file name.
    """
    if kind not in ORACLE_KINDS:
        raise ValueError(f"Invalid argument kind={kind}. (expected one of {ORACLE_KINDS})")

    if kind == "hermite":
        state = scenario.build_state(verbose)
        pdf = ideal_pdf(
            state,
            scenario.quadrature_spec(),
            grid=scenario.grid.explicit(),
            points=scenario.grid.points,
            width=scenario.grid.width,
            verbose=verbose,
        )
        outputs = {IDEAL_PDF_FNAME: pdf}
        summary = {
            IDEAL_PDF_FNAME: {
                "points": len(pdf.grid),
                "mass": pdf.mass(),
                "mean": pdf.moment(1),
                "variance": pdf.moment(2) - pdf.moment(1) ** 2,
            }
        }
    else:
        dists = oracle_distributions(scenario, kind, verbose)
        outputs = {distribution_fname(dist.delta): dist for dist in dists}
        summary = {
            distribution_fname(dist.delta): {
                "atoms": len(dist),
                "mass": dist.total_mass,
                "mean": dist.mean,
                "variance": dist.variance,
            }
            for dist in dists
        }

    if out_dir is not None:
        out_dir = Path(out_dir)
        created = _prepare_out_dir(out_dir, list(outputs.keys()), force)
        written = []
        try:
            for fname, output in outputs.items():
                written.append(out_dir.joinpath(fname))
                if isinstance(output, QuadraturePdf):
                    write_ideal_pdf(written[-1], output)
                else:
                    write_distribution(written[-1], output)
        except BaseException:
            remove_outputs(written, out_dir if created else None, rm_root=created)
            raise

    return summary


def _main_run(args: Namespace, scenario: Scenario) -> None:
    report = run_scenario(scenario, args.out, args.force, args.workers, args.verbose)
    if args.verbose >= 1:
        print(yaml.dump({"criteria": report["criteria"]}, sort_keys=False))


def _main_oracle(args: Namespace, scenario: Scenario) -> None:
    summary = run_oracle(scenario, args.kind, args.out, args.force, args.verbose)
    if args.verbose >= 0:
        print(yaml.dump(summary, sort_keys=False))
