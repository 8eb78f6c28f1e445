#!/usr/bin/python3
# -*- coding: utf-8 -*-

import math
import unittest

from unittest import TestCase

import numpy as np

from scipy.stats import skellam

from bbp_homodyne.core.convergence import total_variation
from bbp_homodyne.core.fock import FockBasis, operator_moment
from bbp_homodyne.core.measurement import (
    bbp_distribution,
    build_q_delta,
    calorimeter_difference_matrix,
    displaced_number_amplitudes,
    explicit_lo_distribution,
    outgoing_fock_distribution,
    quadrature_matrix,
    second_moment_bias,
    skellam_oracle_distribution,
    third_moment_bias_coefficient,
)
from bbp_homodyne.core.optics import QuadratureSpec, lo_amplitude
from bbp_homodyne.core.states import StateSpec, build_state, coherent_amplitudes_to_state
from bbp_homodyne.errors import TruncationError


ALPHA = (1j / math.sqrt(2.0),)


class TestQDelta(TestCase):
    def test_vacuum_second_moment(self) -> None:
        basis = FockBasis(2, 6)
        state = build_state(basis, StateSpec.vacuum(), 1)
        for delta in (1.0, 0.5, 0.1, 0.01):
            op = build_q_delta(basis, QuadratureSpec(ALPHA, (1.0,), delta))
            self.assertTrue(op.matrix.is_hermitian())
            self.assertAlmostEqual(operator_moment(op.matrix, state, 2).value, 0.5, places=12)

    def test_ideal_limit(self) -> None:
        basis = FockBasis(2, 8)
        spec = QuadratureSpec(ALPHA, (1.3,), 0.0)
        op = build_q_delta(basis, spec)
        self.assertEqual((op.matrix - quadrature_matrix(basis, spec)).max_abs(), 0.0)

        state = build_state(basis, StateSpec.vacuum(), 1)
        dist = bbp_distribution(state, op)
        self.assertAlmostEqual(dist.mean, 0.0, places=10)
        self.assertAlmostEqual(dist.variance, 0.5, places=10)

        # No local oscillator amplitude exists at delta = 0.
        with self.assertRaises(ValueError):
            calorimeter_difference_matrix(basis, spec)
        with self.assertRaises(ValueError):
            explicit_lo_distribution(StateSpec.vacuum(), spec, 8)
        with self.assertRaises(ValueError):
            skellam_oracle_distribution([0.5], spec)

    def test_strong_coupling(self) -> None:
        basis = FockBasis(2, 6)
        state = build_state(basis, StateSpec.vacuum(), 1)
        op = build_q_delta(basis, QuadratureSpec(ALPHA, (1.0,), 3.0))
        self.assertAlmostEqual(operator_moment(op.matrix, state, 2).value, 0.5, places=12)

    def test_invalid_basis(self) -> None:
        with self.assertRaises(ValueError):
            build_q_delta(FockBasis(3, 4), QuadratureSpec(ALPHA, (1.0,), 0.5))

    def test_unit_weight_reduction(self) -> None:
        for alpha in (ALPHA, (0.5, 0.5j)):
            basis = FockBasis(2 * len(alpha), 8)
            for delta in (0.2, 0.1, 0.05, 0.025):
                spec = QuadratureSpec(alpha, (1.0,) * len(alpha), delta)
                difference = build_q_delta(basis, spec).matrix - calorimeter_difference_matrix(basis, spec)
                self.assertLessEqual(difference.max_abs(), 1e-12)

    def test_weighted_reduction(self) -> None:
        # The identity holds for any frequency.
        basis = FockBasis(2, 6)
        spec = QuadratureSpec(ALPHA, (1.3,), 0.1)
        difference = build_q_delta(basis, spec).matrix - calorimeter_difference_matrix(basis, spec)
        self.assertLessEqual(difference.max_abs(), 1e-12)


class TestDisplacedFrame(TestCase):
    def test_first_and_second_moment(self) -> None:
        basis = FockBasis(2, 30)
        state = build_state(basis, StateSpec.coherent([2.0]), 1)
        spec = QuadratureSpec(ALPHA, (1.3,), 0.05)
        dist = bbp_distribution(state, build_q_delta(basis, spec))

        quadrature = quadrature_matrix(basis, spec)
        mean = operator_moment(quadrature, state, 1).value
        variance = operator_moment(quadrature, state, 2).value - mean**2
        bias = second_moment_bias(state, spec)

        self.assertAlmostEqual(dist.total_mass, 1.0, places=10)
        self.assertAlmostEqual(mean, 2.0 * math.sqrt(2.0), places=10)
        self.assertLessEqual(abs(dist.mean - mean), 1e-9)
        self.assertAlmostEqual(bias, 0.0169, places=12)
        self.assertLessEqual(abs((dist.variance - variance) - bias), 1e-8 * bias)

    def test_real_gauge(self) -> None:
        basis = FockBasis(2, 12)
        state = build_state(basis, StateSpec.coherent([0.5 + 0.5j]), 1)
        op = build_q_delta(basis, QuadratureSpec((0.3 + 0.6j,), (1.0,), 0.3))
        real = bbp_distribution(state, op, real_gauge=True)
        complex_ = bbp_distribution(state, op, real_gauge=False)
        self.assertLessEqual(total_variation(real, complex_), 1e-9)

    def test_validated_eigendecomposition(self) -> None:
        basis = FockBasis(2, 20)
        state = build_state(basis, StateSpec.cat([1.0]), 1)
        op = build_q_delta(basis, QuadratureSpec(ALPHA, (1.3,), 0.1))
        validated = bbp_distribution(state, op, validate=True)
        np.testing.assert_allclose(validated.values, bbp_distribution(state, op).values, atol=1e-12)
        self.assertAlmostEqual(validated.total_mass, 1.0, places=10)

    def test_multimode_bias(self) -> None:
        basis = FockBasis(4, 12)
        state = build_state(basis, StateSpec.coherent([0.7, 0.3j]), 2)
        spec = QuadratureSpec((0.5, 0.5j), (1.0, 2.0), 0.2)
        dist = bbp_distribution(state, build_q_delta(basis, spec))
        quadrature = quadrature_matrix(basis, spec)
        mean = operator_moment(quadrature, state, 1).value
        variance = operator_moment(quadrature, state, 2).value - mean**2

        expected_bias = 0.04 * (1.0 * 0.49 + 4.0 * 0.09)
        self.assertAlmostEqual(second_moment_bias(state, spec), expected_bias, places=10)
        self.assertLessEqual(abs(dist.mean - mean), 1e-9)
        self.assertLessEqual(abs((dist.variance - variance) - expected_bias), 1e-8 * expected_bias)

    def test_lo_must_be_vacuum(self) -> None:
        basis = FockBasis(2, 4)
        state = build_state(basis, StateSpec.fock([0, 1]), 2)
        with self.assertRaises(ValueError):
            bbp_distribution(state, build_q_delta(basis, QuadratureSpec(ALPHA, (1.0,), 0.5)))


class TestOracles(TestCase):
    def test_three_paths(self) -> None:
        signal = StateSpec.coherent([0.5])
        basis = FockBasis(2, 25)
        state = build_state(basis, signal, 1)
        for delta in (1.0, 0.5):
            spec = QuadratureSpec(ALPHA, (1.0,), delta)
            displaced = bbp_distribution(state, build_q_delta(basis, spec))
            explicit = explicit_lo_distribution(signal, spec, 25)
            oracle = skellam_oracle_distribution(signal, spec)
            self.assertLessEqual(total_variation(displaced, explicit), 1e-6)
            self.assertLessEqual(total_variation(displaced, oracle), 1e-6)
            self.assertLessEqual(total_variation(explicit, oracle), 1e-6)

    def test_skellam_matches_scipy(self) -> None:
        spec = QuadratureSpec(ALPHA, (1.0,), 0.5)
        gamma = 0.5
        dist = skellam_oracle_distribution([gamma], spec)
        beta = complex(lo_amplitude(spec)[0])
        mu_c = abs(gamma + beta) ** 2 / 2.0
        mu_d = abs(gamma - beta) ** 2 / 2.0
        counts = np.rint(dist.values / spec.delta).astype(int)
        np.testing.assert_allclose(dist.probabilities, skellam.pmf(counts, mu_c, mu_d), atol=1e-10)
        self.assertLessEqual(1.0 - dist.total_mass, 1e-10)

    def test_skellam_rejects_non_coherent(self) -> None:
        with self.assertRaises(ValueError):
            skellam_oracle_distribution(StateSpec.fock([1]), QuadratureSpec(ALPHA, (1.0,), 0.5))

    def test_explicit_lo_budget(self) -> None:
        with self.assertRaises(TruncationError):
            explicit_lo_distribution(StateSpec.vacuum(), QuadratureSpec(ALPHA, (1.0,), 0.05), 12)

    def test_explicit_lo_vacuum_symmetry(self) -> None:
        dist = explicit_lo_distribution(StateSpec.vacuum(), QuadratureSpec(ALPHA, (1.0,), 0.5), 20)
        np.testing.assert_allclose(dist.values, -dist.values[::-1], atol=1e-12)
        np.testing.assert_allclose(dist.probabilities, dist.probabilities[::-1], atol=1e-12)
        self.assertAlmostEqual(dist.mean, 0.0, places=12)

    def test_outgoing_fock(self) -> None:
        basis = FockBasis(2, 30)
        spec = QuadratureSpec(ALPHA, (1.3,), 0.2)
        state = build_state(basis, StateSpec.coherent([1.0]), 1)
        outgoing = outgoing_fock_distribution(state, spec)
        oracle = skellam_oracle_distribution([1.0], spec)
        self.assertLessEqual(total_variation(outgoing, oracle), 1e-6)
        self.assertEqual(outgoing.source, "outgoing_fock")

        lattice = outgoing.values / (spec.delta * spec.weights[0])
        np.testing.assert_allclose(lattice, np.rint(lattice), atol=1e-9)

    def test_outgoing_fock_number_state(self) -> None:
        basis = FockBasis(2, 30)
        spec = QuadratureSpec(ALPHA, (1.3,), 0.1)
        state = build_state(basis, StateSpec.fock([1]), 1)
        outgoing = outgoing_fock_distribution(state, spec)
        displaced = bbp_distribution(state, build_q_delta(basis, spec))
        self.assertAlmostEqual(outgoing.total_mass, 1.0, places=8)
        self.assertAlmostEqual(outgoing.mean, displaced.mean, places=8)
        self.assertAlmostEqual(outgoing.variance, displaced.variance, places=8)

    def test_outgoing_fock_single_mode_only(self) -> None:
        state = build_state(FockBasis(4, 4), StateSpec.vacuum(), 2)
        with self.assertRaises(ValueError):
            outgoing_fock_distribution(state, QuadratureSpec((0.5, 0.5j), (1.0, 1.0), 0.5))

    def test_displaced_number_amplitudes(self) -> None:
        mu = 0.7 - 0.4j
        amplitudes = displaced_number_amplitudes(mu, 40, 3)
        expected = coherent_amplitudes_to_state(FockBasis(1, 40), [mu]).ket
        np.testing.assert_allclose(amplitudes[:, 0], expected, atol=1e-14)
        np.testing.assert_allclose(np.linalg.norm(amplitudes, axis=0), np.ones(4), atol=1e-12)


class TestBiasCoefficients(TestCase):
    def test_third_moment(self) -> None:
        basis = FockBasis(2, 30)
        state = build_state(basis, StateSpec.coherent([1.0]), 1)
        spec = QuadratureSpec(ALPHA, (1.3,), 0.1)
        coefficient = third_moment_bias_coefficient(state, spec)
        quadrature = quadrature_matrix(basis, spec)
        ideal = operator_moment(quadrature, state, 3).value
        measured = operator_moment(build_q_delta(basis, spec).matrix, state, 3).value
        self.assertAlmostEqual(measured - ideal, coefficient * spec.delta**2, places=10)

    def test_vacuum(self) -> None:
        basis = FockBasis(2, 10)
        state = build_state(basis, StateSpec.vacuum(), 1)
        spec = QuadratureSpec(ALPHA, (1.0,), 0.5)
        self.assertEqual(second_moment_bias(state, spec), 0.0)
        self.assertAlmostEqual(third_moment_bias_coefficient(state, spec), 0.0, places=14)


if __name__ == "__main__":
    unittest.main()
