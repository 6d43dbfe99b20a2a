# built in imports
import unittest

# third-party imports
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

# custom imports
from lassodof.classes import (DesignSpec, SignalSpec, NoiseSpec, make_design, make_signal, observe,
                              spawn_streams)
from lassodof.utils import DESIGN_KIND, InvalidSpec, DimensionMismatch


class TestDesigns(unittest.TestCase):

    def test_gaussian(self):
        A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, 20, 40, seed=3))
        self.assertEqual(A.shape, (20, 40))
        assert_array_equal(A, make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, 20, 40, seed=3)))
        self.assertFalse(np.array_equal(A, make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, 20, 40, seed=4))))
        # entries N(0, 1/n)
        large = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, 100, 400, seed=0))
        self.assertAlmostEqual(np.mean(np.sum(large ** 2, axis=0)), 1.0, delta=0.05)

    def test_convolution(self):
        A = make_design(DesignSpec(DESIGN_KIND.CONVOLUTION, 16, 16, blur_width=2.0))
        assert_allclose(np.linalg.norm(A, axis=0), np.ones(16), atol=1e-12)
        # circulant
        assert_allclose(A[1:, 1:], A[:-1, :-1], atol=1e-15)
        assert_allclose(make_design(DesignSpec(DESIGN_KIND.CONVOLUTION, 5, 5, blur_width=0.0)), np.eye(5))
        with self.assertRaises(InvalidSpec):
            make_design(DesignSpec(DESIGN_KIND.CONVOLUTION, 8, 16))

    def test_partial_fourier(self):
        A = make_design(DesignSpec(DESIGN_KIND.PARTIAL_FOURIER, 8, 32, seed=1))
        self.assertEqual(A.shape, (8, 32))
        assert_allclose(A @ A.T, np.eye(8), atol=1e-12)
        with self.assertRaises(InvalidSpec):
            make_design(DesignSpec(DESIGN_KIND.PARTIAL_FOURIER, 40, 32))

    def test_gaussian_column_norms(self):
        A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, 256, 1024, seed=7))
        squared_norms = np.sum(A ** 2, axis=0)
        self.assertAlmostEqual(np.mean(squared_norms), 1.0, delta=0.02)
        self.assertAlmostEqual(np.mean(np.sqrt(squared_norms)), 1.0, delta=0.02)

    def test_partial_fourier_square_is_orthogonal(self):
        A = make_design(DesignSpec(DESIGN_KIND.PARTIAL_FOURIER, 32, 32, seed=5))
        self.assertLess(np.max(np.abs(A.T @ A - np.eye(32))), 1e-10)

    def test_noise_level(self):
        n, sigma = 20, 1.5
        A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, n, 2 * n, seed=0))
        x0 = np.zeros(2 * n)
        energies = [np.sum(observe(A, x0, NoiseSpec(sigma, stream)) ** 2) / n for stream in spawn_streams(8, 200)]
        self.assertAlmostEqual(np.mean(energies), sigma ** 2, delta=0.2)

    def test_explicit(self):
        spec = DesignSpec.from_dict(dict(kind='explicit', n=2, p=2, entries=[[1, 1], [0, 1]]))
        assert_allclose(make_design(spec), np.array([[1.0, 1.0], [0.0, 1.0]]))
        with self.assertRaises(InvalidSpec):
            make_design(DesignSpec(DESIGN_KIND.EXPLICIT, 3, 2, entries=((1.0, 1.0), (0.0, 1.0))))
        with self.assertRaises(InvalidSpec):
            DesignSpec.from_dict(dict(kind='wavelet', n=2, p=2))

    def test_signal(self):
        x0 = make_signal(SignalSpec(50, 7), 11)
        self.assertEqual(np.count_nonzero(x0), 7)
        assert_array_equal(x0, make_signal(SignalSpec(50, 7), 11))
        self.assertEqual(SignalSpec.from_fraction(40, 0.1).sparsity, 4)
        self.assertEqual(SignalSpec.from_fraction(10, 0.15).sparsity, 2)
        with self.assertRaises(InvalidSpec):
            make_signal(SignalSpec(5, 6), 0)

    def test_observe(self):
        A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, 10, 20, seed=0))
        x0 = make_signal(SignalSpec(20, 3), 1)
        first, second = spawn_streams(5, 2)
        y = observe(A, x0, NoiseSpec(1.0, first))
        assert_array_equal(y, observe(A, x0, NoiseSpec(1.0, spawn_streams(5, 2)[0])))
        self.assertFalse(np.array_equal(y, observe(A, x0, NoiseSpec(1.0, second))))
        assert_allclose(observe(A, x0, NoiseSpec(1e-300, 0)), A @ x0, atol=1e-12)
        with self.assertRaises(DimensionMismatch):
            observe(A, np.ones(19), NoiseSpec())
        with self.assertRaises(InvalidSpec):
            observe(A, x0, NoiseSpec(sigma=0.0))


if __name__ == '__main__':
    unittest.main()
