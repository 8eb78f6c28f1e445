#!/usr/bin/python3
# -*- coding: utf-8 -*-

import math
import unittest

from unittest import TestCase

import numpy as np

from numpy.polynomial.hermite import hermgauss
from scipy.special import eval_hermite, factorial

from bbp_homodyne.core.fock import FockBasis
from bbp_homodyne.core.optics import QuadratureSpec
from bbp_homodyne.core.quadrature import (
    hermite_functions,
    ideal_bilinear,
    ideal_cdf,
    ideal_moments,
    ideal_pdf,
)
from bbp_homodyne.core.states import StateSpec, build_state, pure_state


ALPHA = (1j / math.sqrt(2.0),)


def _coherent_wavefunction(x: np.ndarray, gamma: float) -> np.ndarray:
    return math.pi**-0.25 * np.exp(-0.5 * (x - math.sqrt(2.0) * gamma) ** 2)


class TestHermiteFunctions(TestCase):
    def test_closed_form(self) -> None:
        x = np.linspace(-4.0, 4.0, 17)
        table = hermite_functions(6, x)
        for n in range(7):
            expected = eval_hermite(n, x) * np.exp(-0.5 * x**2) / math.sqrt(2.0**n * factorial(n) * math.sqrt(math.pi))
            np.testing.assert_allclose(table[n], expected, atol=1e-12)

    def test_orthonormal(self) -> None:
        x = np.linspace(-15.0, 15.0, 6001)
        table = hermite_functions(20, x)
        gram = table @ table.T * (x[1] - x[0])
        np.testing.assert_allclose(gram, np.eye(21), atol=1e-10)

    def test_orthonormal_gauss_hermite(self) -> None:
        # Exact for psi_m psi_n exp(x^2), a polynomial of degree m + n <= 50.
        nodes, weights = hermgauss(60)
        table = hermite_functions(25, nodes)
        gram = (table * (weights * np.exp(nodes**2))) @ table.T
        np.testing.assert_allclose(gram, np.eye(26), atol=1e-10)

    def test_large_order(self) -> None:
        table = hermite_functions(150, np.linspace(-20.0, 20.0, 101))
        self.assertTrue(np.all(np.isfinite(table)))


class TestIdealPdf(TestCase):
    def test_vacuum(self) -> None:
        basis = FockBasis(2, 10)
        state = build_state(basis, StateSpec.vacuum(), 1)
        pdf = ideal_pdf(state, QuadratureSpec(ALPHA, (1.0,), 1.0))
        np.testing.assert_allclose(pdf.values, np.exp(-(pdf.grid**2)) / math.sqrt(math.pi), atol=1e-12)
        self.assertAlmostEqual(pdf.mass(), 1.0, places=10)
        self.assertAlmostEqual(pdf.moment(2), 0.5, places=8)

    def test_even_cat(self) -> None:
        gamma = 2.0
        basis = FockBasis(2, 30)
        state = build_state(basis, StateSpec.cat([gamma]), 1)
        pdf = ideal_pdf(state, QuadratureSpec(ALPHA, (1.3,), 0.2))
        x = pdf.grid
        wave = _coherent_wavefunction(x, gamma) + _coherent_wavefunction(x, -gamma)
        expected = wave**2 / (2.0 * (1.0 + math.exp(-2.0 * gamma**2)))
        np.testing.assert_allclose(pdf.values, expected, atol=1e-8)

    def test_odd_cat(self) -> None:
        gamma = 1.5
        basis = FockBasis(2, 30)
        state = build_state(basis, StateSpec.cat([gamma], parity=-1), 1)
        pdf = ideal_pdf(state, QuadratureSpec(ALPHA, (1.0,), 1.0))
        x = pdf.grid
        wave = _coherent_wavefunction(x, gamma) - _coherent_wavefunction(x, -gamma)
        expected = wave**2 / (2.0 * (1.0 - math.exp(-2.0 * gamma**2)))
        np.testing.assert_allclose(pdf.values, expected, atol=1e-8)

    def test_scaled_quadrature(self) -> None:
        # q = 2 (a + a^dagger) / sqrt(2) has density p_x(y / 2) / 2.
        basis = FockBasis(2, 10)
        state = build_state(basis, StateSpec.vacuum(), 1)
        pdf = ideal_pdf(state, QuadratureSpec((math.sqrt(2.0) * 1j,), (1.0,), 1.0))
        expected = np.exp(-((pdf.grid / 2.0) ** 2)) / (2.0 * math.sqrt(math.pi))
        np.testing.assert_allclose(pdf.values, expected, atol=1e-12)

    def test_explicit_grid(self) -> None:
        basis = FockBasis(2, 10)
        state = build_state(basis, StateSpec.vacuum(), 1)
        spec = QuadratureSpec(ALPHA, (1.0,), 1.0)
        grid = np.linspace(-3.0, 3.0, 7)
        pdf = ideal_pdf(state, spec, grid=grid)
        np.testing.assert_allclose(pdf.grid, grid)
        with self.assertRaises(ValueError):
            ideal_pdf(state, spec, grid=grid[::-1])

    def test_cdf(self) -> None:
        basis = FockBasis(2, 20)
        state = build_state(basis, StateSpec.coherent([1.0]), 1)
        pdf = ideal_pdf(state, QuadratureSpec(ALPHA, (1.0,), 1.0))
        cdf = ideal_cdf(pdf)
        self.assertEqual(cdf[0], 0.0)
        self.assertAlmostEqual(float(cdf[-1]), 1.0, places=8)
        self.assertTrue(np.all(np.diff(cdf) >= 0.0))
        self.assertAlmostEqual(float(pdf.cdf_at(math.sqrt(2.0))), 0.5, places=5)
        self.assertEqual(float(pdf.cdf_at(pdf.grid[0] - 1.0)), 0.0)
        self.assertEqual(float(pdf.cdf_at(pdf.grid[-1] + 1.0)), 1.0)

    def test_widened(self) -> None:
        basis = FockBasis(2, 10)
        state = build_state(basis, StateSpec.vacuum(), 1)
        spec = QuadratureSpec(ALPHA, (1.0,), 1.0)
        pdf = ideal_pdf(state, spec, grid=np.linspace(-1.0, 1.0, 201))
        widened = pdf.widened()
        self.assertAlmostEqual(widened.grid[0], -2.0)
        self.assertAlmostEqual(widened.grid[-1], 2.0)
        self.assertGreater(widened.mass(), pdf.mass())

    def test_multimode(self) -> None:
        basis = FockBasis(4, 12)
        state = build_state(basis, StateSpec.coherent([0.7, 0.3j]), 2)
        spec = QuadratureSpec((0.5, 0.5j), (1.0, 2.0), 0.2)
        moments = ideal_moments(state, spec, [1, 2])
        for moment in moments:
            self.assertLessEqual(moment.discrepancy, 1e-7 * max(1.0, abs(moment.value)))
        # <q> = -i sum_k (alpha_k conj(gamma_k) - conj(alpha_k) gamma_k) = 0 and Var q = s^2
        self.assertAlmostEqual(moments[0].value, 0.0, places=8)
        self.assertAlmostEqual(moments[1].value, 0.5, places=8)


class TestIdealMoments(TestCase):
    def test_coherent(self) -> None:
        basis = FockBasis(2, 30)
        state = build_state(basis, StateSpec.coherent([1.0]), 1)
        moments = ideal_moments(state, QuadratureSpec(ALPHA, (1.3,), 0.2), [1, 2, 3, 4])
        # x ~ N(sqrt(2), 1/2)
        mu, var = math.sqrt(2.0), 0.5
        expected = [mu, mu**2 + var, mu**3 + 3 * mu * var, mu**4 + 6 * mu**2 * var + 3 * var**2]
        for moment, value in zip(moments, expected):
            self.assertAlmostEqual(moment.value, value, places=9)
            self.assertLessEqual(moment.discrepancy, 1e-7 * max(1.0, abs(value)))
            self.assertFalse(moment.contaminated)


class TestIdealBilinear(TestCase):
    def test_overlap(self) -> None:
        basis = FockBasis(2, 20)
        phi = pure_state(basis, StateSpec.coherent([1.0]), 1)
        psi = pure_state(basis, StateSpec.coherent([-1.0]), 1)
        spec = QuadratureSpec(ALPHA, (1.0,), 0.2)
        value = ideal_bilinear(phi, psi, np.ones_like, spec)
        self.assertAlmostEqual(value, math.exp(-2.0), places=8)

    def test_diagonal(self) -> None:
        basis = FockBasis(2, 20)
        phi = pure_state(basis, StateSpec.coherent([0.5]), 1)
        spec = QuadratureSpec(ALPHA, (1.0,), 0.2)
        value = ideal_bilinear(phi, phi, np.cos, spec)
        # E[cos x] for x ~ N(m, 1/2) is cos(m) exp(-1/4)
        self.assertAlmostEqual(value, math.cos(0.5 * math.sqrt(2.0)) * math.exp(-0.25), places=8)


if __name__ == "__main__":
    unittest.main()
