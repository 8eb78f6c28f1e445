#!/usr/bin/python3
# -*- coding: utf-8 -*-

import json
import math
import os
import os.path as osp
import tempfile
import unittest

from argparse import Namespace
from pathlib import Path
from unittest import TestCase

from bbp_homodyne.__main__ import _main_bbp
from bbp_homodyne.core.scenario import Scenario, load_scenario
from bbp_homodyne.core.states import StateSpec
from bbp_homodyne.errors import TruncationError
from bbp_homodyne.run import (
    IDEAL_PDF_FNAME,
    PLOTDATA_FNAME,
    REPORT_FNAME,
    _main_run,
    distribution_fname,
    output_fnames,
    run_oracle,
    run_scenario,
)
from bbp_homodyne.utils.cmdline import (
    EXIT_NO_INPUT,
    EXIT_SUCCESS,
    EXIT_TRUNCATION,
    EXIT_USAGE,
    EXIT_VALIDATION,
)
from bbp_homodyne.utils.files import hash_directory, read_csv_columns


SCENARIOS_ROOT = Path(__file__).parent.parent.joinpath("scenarios")
ALPHA = (1j / math.sqrt(2.0),)


def _small_scenario(**kwargs) -> Scenario:
    fields = dict(
        name="small",
        signal_modes=1,
        weights=(1.0,),
        alpha=ALPHA,
        state=StateSpec.vacuum(),
        deltas=(0.5, 0.25, 0.125),
        total_cutoff=8,
    )
    fields.update(kwargs)
    return Scenario(**fields)


def _write_config(root: str, scenario: Scenario) -> str:
    fpath = osp.join(root, f"{scenario.name}.json")
    with open(fpath, "w") as file:
        json.dump(scenario.to_dict(), file)
    return fpath


class TestRunScenario(TestCase):
    def test_outputs(self) -> None:
        scenario = _small_scenario()
        with tempfile.TemporaryDirectory() as tmpdir:
            out_dir = osp.join(tmpdir, "out")
            report = run_scenario(scenario, out_dir)

            self.assertListEqual(sorted(os.listdir(out_dir)), sorted(output_fnames(scenario)))
            self.assertIn("distribution_delta=0.125.csv", os.listdir(out_dir))

            for delta in scenario.deltas:
                columns = read_csv_columns(osp.join(out_dir, distribution_fname(delta)))
                self.assertListEqual(list(columns.keys()), ["value", "probability"])
                self.assertAlmostEqual(sum(columns["probability"]), 1.0, delta=1e-10)
                self.assertListEqual(columns["value"], sorted(columns["value"]))

            pdf_columns = read_csv_columns(osp.join(out_dir, IDEAL_PDF_FNAME))
            self.assertListEqual(list(pdf_columns.keys()), ["y", "pdf", "cdf"])
            plot_columns = read_csv_columns(osp.join(out_dir, PLOTDATA_FNAME))
            self.assertListEqual(
                list(plot_columns.keys()),
                ["y", "ideal_cdf", "cdf_delta=0.5", "cdf_delta=0.25", "cdf_delta=0.125"],
            )

            with open(osp.join(out_dir, REPORT_FNAME), "r") as file:
                content = json.load(file)
            self.assertEqual(content["name"], "small")
            self.assertListEqual(content["deltas"], [0.5, 0.25, 0.125])
            self.assertEqual(content["criteria"], report["criteria"])
            self.assertTrue(report["criteria"]["first_moment_identity"])
            self.assertTrue(report["criteria"]["second_moment_bias"])

    def test_outputs_subset(self) -> None:
        scenario = _small_scenario(outputs=("report",))
        with tempfile.TemporaryDirectory() as tmpdir:
            run_scenario(scenario, tmpdir)
            self.assertListEqual(os.listdir(tmpdir), [REPORT_FNAME])

    def test_overwrite(self) -> None:
        scenario = _small_scenario(outputs=("distributions", "report"))
        with tempfile.TemporaryDirectory() as tmpdir:
            run_scenario(scenario, tmpdir)
            first = hash_directory(tmpdir)
            with self.assertRaises(FileExistsError):
                run_scenario(scenario, tmpdir)
            run_scenario(scenario, tmpdir, force=True)
            self.assertDictEqual(hash_directory(tmpdir), first)

    def test_cleanup_on_failure(self) -> None:
        scenario = _small_scenario(state=StateSpec.coherent([3.0]))
        with tempfile.TemporaryDirectory() as tmpdir:
            out_dir = osp.join(tmpdir, "out")
            with self.assertRaises(TruncationError):
                run_scenario(scenario, out_dir)
            self.assertFalse(osp.exists(out_dir))

    def test_not_a_directory(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            fpath = osp.join(tmpdir, "file")
            Path(fpath).touch()
            with self.assertRaises(NotADirectoryError):
                run_scenario(_small_scenario(), fpath)


class TestRunOracle(TestCase):
    def test_skellam(self) -> None:
        scenario = load_scenario(SCENARIOS_ROOT.joinpath("oracle_coherent.json"))
        summary = run_oracle(scenario, "skellam")
        self.assertListEqual(list(summary.keys()), [distribution_fname(delta) for delta in scenario.deltas])
        for values in summary.values():
            self.assertAlmostEqual(values["mass"], 1.0, delta=1e-10)
            self.assertAlmostEqual(values["mean"], 0.5 * math.sqrt(2.0), places=8)

    def test_hermite_written(self) -> None:
        scenario = _small_scenario()
        with tempfile.TemporaryDirectory() as tmpdir:
            summary = run_oracle(scenario, "hermite", tmpdir)
            self.assertListEqual(os.listdir(tmpdir), [IDEAL_PDF_FNAME])
            self.assertAlmostEqual(summary[IDEAL_PDF_FNAME]["mass"], 1.0, places=8)
            self.assertAlmostEqual(summary[IDEAL_PDF_FNAME]["variance"], 0.5, places=6)

    def test_invalid(self) -> None:
        with self.assertRaises(ValueError):
            run_oracle(_small_scenario(), "hamiltonian")
        with self.assertRaises(ValueError):
            run_oracle(_small_scenario(state=StateSpec.cat([1.0])), "skellam")


class TestMain(TestCase):
    def test_usage(self) -> None:
        self.assertEqual(_main_bbp([]), EXIT_SUCCESS)

    def test_unknown_flag(self) -> None:
        with self.assertRaises(SystemExit) as context:
            _main_bbp(["run", "--bogus"])
        self.assertEqual(context.exception.code, EXIT_USAGE)

    def test_missing_config(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            code = _main_bbp(["run", "--config", osp.join(tmpdir, "missing.json"), "--out", tmpdir, "--verbose", "0"])
        self.assertEqual(code, EXIT_NO_INPUT)

    def test_run(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            config = _write_config(tmpdir, _small_scenario(outputs=("report",)))
            out_dir = osp.join(tmpdir, "out")
            args = ["run", "--config", config, "--out", out_dir, "--verbose", "0"]
            self.assertEqual(_main_bbp(args), EXIT_SUCCESS)
            self.assertTrue(osp.isfile(osp.join(out_dir, REPORT_FNAME)))

            self.assertEqual(_main_bbp(args), EXIT_VALIDATION)
            self.assertEqual(_main_bbp(args + ["--force", "true"]), EXIT_SUCCESS)

    def test_run_entry(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            args = Namespace(out=tmpdir, force=True, workers=1, verbose=0)
            self.assertIsNone(_main_run(args, _small_scenario(outputs=("report",))))
            self.assertTrue(osp.isfile(osp.join(tmpdir, REPORT_FNAME)))

    def test_invalid_config(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            config = osp.join(tmpdir, "invalid.json")
            with open(config, "w") as file:
                file.write('{"name": "invalid"}')
            code = _main_bbp(["run", "--config", config, "--out", tmpdir, "--verbose", "0"])
        self.assertEqual(code, EXIT_VALIDATION)

    def test_truncation(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdir:
            config = _write_config(tmpdir, _small_scenario(state=StateSpec.coherent([3.0])))
            code = _main_bbp(["run", "--config", config, "--out", osp.join(tmpdir, "out"), "--verbose", "0"])
        self.assertEqual(code, EXIT_TRUNCATION)

    def test_oracle(self) -> None:
        config = str(SCENARIOS_ROOT.joinpath("oracle_coherent.json"))
        self.assertEqual(_main_bbp(["oracle", "--kind", "skellam", "--config", config, "--verbose", "0"]), EXIT_SUCCESS)


if __name__ == "__main__":
    unittest.main()
