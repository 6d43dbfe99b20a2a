# built in imports
import unittest

# third-party imports
import numpy as np
from numpy.testing import assert_allclose

# custom imports
from lassodof.utils import (numerical_rank, pseudo_inverse, projector, complement_projector, kernel_vector,
                            gram_solve, as_matrix, RankDeficient, FullRank, DimensionMismatch)


class TestNumerics(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(0)
        self.M = rng.standard_normal((6, 3))
        self.duplicated = np.column_stack([self.M, self.M[:, 0]])

    def test_rank(self):
        self.assertEqual(numerical_rank(self.M).rank, 3)
        self.assertEqual(numerical_rank(self.duplicated).rank, 3)
        self.assertEqual(numerical_rank(np.diag([1.0, 1e-12])).rank, 1)
        info = numerical_rank(np.zeros((3, 0)))
        self.assertEqual(info.rank, 0)
        self.assertEqual(numerical_rank(np.zeros((3, 2))).rank, 0)
        with self.assertRaises(ValueError):
            numerical_rank(self.M, tol=0.0)

    def test_as_matrix(self):
        self.assertEqual(as_matrix([1.0, 2.0]).shape, (2, 1))
        with self.assertRaises(DimensionMismatch):
            as_matrix([[1.0, np.nan]])

    def test_pseudo_inverse(self):
        assert_allclose(pseudo_inverse(self.M), np.linalg.pinv(self.M), atol=1e-12)
        assert_allclose(pseudo_inverse(self.M) @ self.M, np.eye(3), atol=1e-12)
        self.assertEqual(pseudo_inverse(np.zeros((4, 0))).shape, (0, 4))
        with self.assertRaises(RankDeficient):
            pseudo_inverse(self.duplicated)

    def test_projector(self):
        P = projector(self.M)
        assert_allclose(P @ P, P, atol=1e-12)
        assert_allclose(P, P.T, atol=1e-12)
        assert_allclose(P @ self.M, self.M, atol=1e-12)
        # duplicated columns span the same space
        assert_allclose(projector(self.duplicated), P, atol=1e-12)
        assert_allclose(complement_projector(self.M) + P, np.eye(6), atol=1e-12)
        assert_allclose(projector(np.zeros((3, 0))), np.zeros((3, 3)))

    def test_kernel_vector(self):
        h = kernel_vector(np.array([[1.0, 1.0], [2.0, 2.0]]))
        assert_allclose(h, np.array([1.0, -1.0]) / np.sqrt(2.0), atol=1e-12)

        h = kernel_vector(self.duplicated)
        self.assertAlmostEqual(np.linalg.norm(h), 1.0)
        self.assertLess(np.linalg.norm(self.duplicated @ h), 1e-10)
        self.assertGreater(h[np.flatnonzero(np.abs(h) > 1e-12)[0]], 0)
        with self.assertRaises(FullRank):
            kernel_vector(self.M)

        # columns a and 2a
        a = self.M[:, 0]
        h = kernel_vector(np.column_stack([a, 2.0 * a]))
        assert_allclose(h, np.array([2.0, -1.0]) / np.sqrt(5.0), atol=1e-12)

    def test_gram_solve(self):
        g = np.array([1.0, -2.0, 0.5])
        assert_allclose(gram_solve(self.M, g), np.linalg.solve(self.M.T @ self.M, g), rtol=1e-10)
        # rank deficient: minimum norm solution of the consistent system
        g = self.duplicated.T @ np.ones(6)
        delta = gram_solve(self.duplicated, g)
        assert_allclose(self.duplicated.T @ self.duplicated @ delta, g, atol=1e-9)
        assert_allclose(delta[0], delta[3], atol=1e-10)


if __name__ == '__main__':
    unittest.main()
