#!/usr/bin/python3
# -*- coding: utf-8 -*-

import unittest

from unittest import TestCase

import numpy as np

from bbp_homodyne.core.fock import (
    DensityOperator,
    FockBasis,
    OperatorMatrix,
    SpectralDistribution,
    annihilation_matrix,
    creation_matrix,
    edge_mass,
    eigendecompose_hermitian,
    merge_atoms,
    number_matrix,
    operator_moment,
    spectral_distribution,
    truncation_tail,
    weighted_energy_matrix,
)
from bbp_homodyne.errors import BasisMismatchError, CapacityError


class TestFockBasis(TestCase):
    def test_ordering(self) -> None:
        basis = FockBasis(2, 2)
        expected = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
        self.assertListEqual([basis.occupation(i) for i in range(basis.size)], expected)
        self.assertListEqual(basis.shells.tolist(), [0, 1, 1, 2, 2, 2])

    def test_sizes(self) -> None:
        self.assertEqual(FockBasis(2, 30).size, 496)
        self.assertEqual(FockBasis(4, 16).size, 4845)
        self.assertEqual(FockBasis(1, 0).size, 1)

    def test_index(self) -> None:
        basis = FockBasis(3, 4)
        for i in range(basis.size):
            self.assertEqual(basis.index(basis.occupation(i)), i)
        self.assertIn((1, 2, 1), basis)
        self.assertNotIn((3, 2, 0), basis)
        with self.assertRaises(ValueError):
            basis.index((3, 2, 0))

    def test_capacity(self) -> None:
        with self.assertRaises(CapacityError):
            FockBasis(4, 16, max_dim=1000)
        with self.assertRaises(ValueError):
            FockBasis(0, 3)

    def test_equality(self) -> None:
        self.assertEqual(FockBasis(2, 5), FockBasis(2, 5))
        self.assertNotEqual(FockBasis(2, 5), FockBasis(2, 6))
        with self.assertRaises(BasisMismatchError):
            FockBasis(2, 5).check_same(FockBasis(3, 5))


class TestLadderOperators(TestCase):
    def test_annihilation(self) -> None:
        basis = FockBasis(2, 3)
        a0 = annihilation_matrix(basis, 0).to_dense()
        # a_0 |2, 1> = sqrt(2) |1, 1>
        self.assertAlmostEqual(a0[basis.index((1, 1)), basis.index((2, 1))], np.sqrt(2.0))
        self.assertEqual(np.count_nonzero(a0[:, basis.index((0, 3))]), 0)

    def test_commutator_below_cutoff(self) -> None:
        basis = FockBasis(2, 6)
        a = annihilation_matrix(basis, 1)
        commutator = (a @ creation_matrix(basis, 1) - creation_matrix(basis, 1) @ a).to_dense()
        below = basis.shells < basis.total_cutoff
        np.testing.assert_allclose(commutator[np.ix_(below, below)], np.eye(below.sum()), atol=1e-12)

    def test_number(self) -> None:
        basis = FockBasis(2, 4)
        n1 = number_matrix(basis, 1)
        product = (creation_matrix(basis, 1) @ annihilation_matrix(basis, 1)).to_dense()
        np.testing.assert_allclose(n1.to_dense(), product, atol=1e-12)
        self.assertTrue(n1.hermitian)

    def test_weighted_energy(self) -> None:
        basis = FockBasis(2, 3)
        energy = weighted_energy_matrix(basis, [1.0, 2.5]).to_dense()
        self.assertAlmostEqual(energy[basis.index((1, 2)), basis.index((1, 2))].real, 6.0)
        with self.assertRaises(ValueError):
            weighted_energy_matrix(basis, [1.0, 0.0])
        with self.assertRaises(ValueError):
            weighted_energy_matrix(basis, [1.0])

    def test_energy_commutes_with_equal_frequency_hopping(self) -> None:
        basis = FockBasis(3, 6)
        energy = weighted_energy_matrix(basis, [1.3, 1.3, 2.0])

        def hopping(j: int, k: int) -> OperatorMatrix:
            hop = creation_matrix(basis, j) @ annihilation_matrix(basis, k)
            return hop + hop.adjoint()

        same = hopping(0, 1)
        self.assertLess((energy @ same - same @ energy).max_abs(), 1e-12)
        other = hopping(0, 2)
        self.assertGreater((energy @ other - other @ energy).max_abs(), 0.5)

    def test_shape_check(self) -> None:
        with self.assertRaises(ValueError):
            OperatorMatrix(FockBasis(1, 3), np.eye(3))


class TestDensityOperator(TestCase):
    def test_pure(self) -> None:
        basis = FockBasis(1, 3)
        ket = np.array([1.0, 1.0j, 0.0, 0.0]) / np.sqrt(2.0)
        state = DensityOperator.from_ket(basis, ket)
        self.assertTrue(state.is_pure)
        self.assertAlmostEqual(state.trace(), 1.0)
        np.testing.assert_allclose(state.entries, np.outer(ket, ket.conj()), atol=1e-15)

    def test_mixed_components(self) -> None:
        basis = FockBasis(1, 2)
        state = DensityOperator(basis, entries=np.diag([0.25, 0.75, 0.0]))
        weights = sorted(weight for weight, _ in state.components())
        np.testing.assert_allclose(weights, [0.25, 0.75], atol=1e-12)
        np.testing.assert_allclose(state.basis_probabilities(), [0.25, 0.75, 0.0], atol=1e-15)

    def test_invalid(self) -> None:
        basis = FockBasis(1, 2)
        with self.assertRaises(ValueError):
            DensityOperator(basis, entries=np.diag([0.5, 0.25, 0.0]))
        with self.assertRaises(ValueError):
            DensityOperator(basis, entries=np.diag([1.5, -0.5, 0.0]))
        with self.assertRaises(ValueError):
            DensityOperator(basis, entries=np.array([[0.5, 0.1, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]]))
        with self.assertRaises(ValueError):
            DensityOperator(basis)

    def test_edge_mass(self) -> None:
        basis = FockBasis(1, 4)
        ket = np.array([0.0, 0.0, 0.0, 0.6, 0.8])
        state = DensityOperator.from_ket(basis, ket)
        self.assertAlmostEqual(edge_mass(state, 1), 0.64)
        self.assertAlmostEqual(edge_mass(state, 2), 1.0)
        self.assertAlmostEqual(truncation_tail(state), 1.0)
        self.assertEqual(edge_mass(state, 0), 0.0)


class TestMergeAtoms(TestCase):
    def test_merge(self) -> None:
        values, probs = merge_atoms(np.array([1.0, 1e-10, 0.0]), np.array([0.5, 0.25, 0.25]), 1e-9)
        np.testing.assert_allclose(values, [5e-11, 1.0], rtol=1e-12)
        np.testing.assert_allclose(probs, [0.5, 0.5])

    def test_no_chaining(self) -> None:
        # Grouping is anchored on the first atom of each group.
        values, probs = merge_atoms(np.array([0.0, 0.6, 1.2]), np.ones(3) / 3.0, 1.0)
        self.assertEqual(len(values), 2)
        np.testing.assert_allclose(probs, [2.0 / 3.0, 1.0 / 3.0])

    def test_null_group(self) -> None:
        values, probs = merge_atoms(np.array([2.0, 2.0 + 1e-12]), np.zeros(2), 1e-9)
        np.testing.assert_allclose(values, [2.0 + 5e-13])
        np.testing.assert_allclose(probs, [0.0])


class TestSpectral(TestCase):
    def test_eigendecompose(self) -> None:
        basis = FockBasis(2, 4)
        op = annihilation_matrix(basis, 0) + creation_matrix(basis, 0)
        op = OperatorMatrix(basis, op.entries, hermitian=True)
        values, vectors = eigendecompose_hermitian(op, validate=True)
        self.assertTrue(np.all(np.diff(values) >= 0.0))
        np.testing.assert_allclose(op.to_dense() @ vectors, vectors * values, atol=1e-10)

    def test_not_hermitian(self) -> None:
        with self.assertRaises(ValueError):
            eigendecompose_hermitian(annihilation_matrix(FockBasis(1, 3), 0))

    def test_number_distribution(self) -> None:
        basis = FockBasis(1, 3)
        ket = np.array([0.6, 0.0, 0.8j, 0.0])
        dist = spectral_distribution(number_matrix(basis, 0), DensityOperator.from_ket(basis, ket))
        np.testing.assert_allclose(dist.values, [0.0, 1.0, 2.0, 3.0], atol=1e-12)
        np.testing.assert_allclose(dist.probabilities, [0.36, 0.0, 0.64, 0.0], atol=1e-12)
        self.assertAlmostEqual(dist.mean, 1.28)
        self.assertAlmostEqual(dist.cdf_at(1.5), 0.36)
        self.assertAlmostEqual(dist.cdf_at(2.0), 1.0)

        validated = spectral_distribution(number_matrix(basis, 0), DensityOperator.from_ket(basis, ket), validate=True)
        np.testing.assert_allclose(validated.probabilities, dist.probabilities, atol=1e-12)

    def test_distribution_validation(self) -> None:
        with self.assertRaises(ValueError):
            SpectralDistribution(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
        dist = SpectralDistribution(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
        self.assertAlmostEqual(dist.variance, 1.0)
        self.assertAlmostEqual(dist.expect(np.cos), np.cos(1.0))


class TestOperatorMoment(TestCase):
    def test_moments(self) -> None:
        basis = FockBasis(1, 20)
        op = annihilation_matrix(basis, 0) + creation_matrix(basis, 0)
        op = OperatorMatrix(basis, op.entries, hermitian=True)
        vacuum = DensityOperator.from_ket(basis, np.eye(basis.size)[0])
        # Moments of (a + a^dagger) in the vacuum: 0, 1, 0, 3, 0, 15
        expected = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0]
        for order, value in enumerate(expected):
            moment = operator_moment(op, vacuum, order)
            self.assertAlmostEqual(moment.value, value, places=10)
            self.assertFalse(moment.contaminated)

    def test_sparse_path(self) -> None:
        basis = FockBasis(1, 20)
        op = annihilation_matrix(basis, 0) + creation_matrix(basis, 0)
        op = OperatorMatrix(basis, op.entries, hermitian=True)
        vacuum = DensityOperator.from_ket(basis, np.eye(basis.size)[0])
        dense = operator_moment(op, vacuum, 4)
        sparse = operator_moment(op, vacuum, 4, sparse_dim=1)
        self.assertAlmostEqual(dense.value, sparse.value, places=12)

    def test_contaminated(self) -> None:
        basis = FockBasis(1, 3)
        state = DensityOperator.from_ket(basis, np.eye(basis.size)[3])
        with self.assertLogs("bbp_homodyne.core.fock", level="WARNING"):
            moment = operator_moment(number_matrix(basis, 0), state, 1)
        self.assertTrue(moment.contaminated)
        self.assertAlmostEqual(moment.value, 3.0)

    def test_invalid(self) -> None:
        basis = FockBasis(1, 3)
        state = DensityOperator.from_ket(basis, np.eye(basis.size)[0])
        with self.assertRaises(ValueError):
            operator_moment(annihilation_matrix(basis, 0), state, 2)
        with self.assertRaises(ValueError):
            operator_moment(number_matrix(basis, 0), state, -1)


if __name__ == "__main__":
    unittest.main()
