# built in imports
import unittest

# third-party imports
import numpy as np
from numpy.testing import assert_allclose

# custom imports
from lassodof.classes import (Problem, LassoSolution, solve, reduce, translate, implicit_response,
                              brute_force_min_support, in_G_lambda, kkt_check, objective)
from lassodof.classes.verification import duplicated_instance
from lassodof.classes.designs import spawn_streams
from lassodof.utils import NotOptimalInput, TooLarge, numerical_rank


def make_solution(x):
    x = np.asarray(x, dtype=float)
    support = np.flatnonzero(x)
    return LassoSolution(x_hat=x, support=support, signs=np.sign(x[support]), iterations_used=0,
                         kkt_residual=0.0)


class TestSupport(unittest.TestCase):

    def setUp(self):
        # columns e1, e1, e2: every split of 2 between the duplicates is optimal
        self.problem = Problem(np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), [3.0, 2.0], 1.0)
        self.spread = make_solution([1.0, 1.0, 1.0])

    def test_reduce_duplicates(self):
        reduced = reduce(self.problem, self.spread)
        assert_allclose(reduced.x_star, [2.0, 0.0, 1.0], atol=1e-12)
        self.assertEqual(reduced.support.tolist(), [0, 2])
        self.assertEqual(reduced.signs.tolist(), [1.0, 1.0])
        self.assertEqual(reduced.active_rank, 2)
        self.assertEqual(reduced.reduction_steps, 1)

    def test_reduce_full_rank_is_identity(self):
        problem = Problem(np.eye(2), [3.0, -1.0], 1.0)
        reduced = reduce(problem, solve(problem))
        assert_allclose(reduced.x_star, [2.0, 0.0], atol=1e-8)
        self.assertEqual(reduced.reduction_steps, 0)

    def test_reduce_zero(self):
        problem = Problem(np.eye(2), [0.5, -0.5], 1.0)
        reduced = reduce(problem, solve(problem))
        self.assertEqual(reduced.support.size, 0)
        self.assertEqual(reduced.active_rank, 0)

    def test_reduce_rejects_non_optimal(self):
        with self.assertRaises(NotOptimalInput):
            reduce(self.problem, make_solution([3.0, 0.0, 2.0]))

    def test_translate_keeps_response(self):
        other = translate(self.problem, self.spread)
        assert_allclose(other, [1.5, 0.5, 1.0], atol=1e-12)
        assert_allclose(self.problem.A @ other, self.problem.A @ self.spread.x_hat, atol=1e-12)
        self.assertAlmostEqual(np.sum(np.abs(other)), 3.0)
        self.assertTrue(kkt_check(self.problem, other).is_optimal)
        self.assertAlmostEqual(objective(self.problem, other), objective(self.problem, self.spread.x_hat))

    def test_implicit_response(self):
        reduced = reduce(self.problem, self.spread)
        assert_allclose(implicit_response(self.problem, reduced), self.problem.A @ reduced.x_star, atol=1e-10)
        assert_allclose(reduced.direction(self.problem.A), [1.0, 1.0], atol=1e-12)

    def test_brute_force(self):
        self.assertEqual(brute_force_min_support(self.problem, self.spread), 2)
        problem = Problem(np.eye(2), [3.0, -1.0], 1.0)
        self.assertEqual(brute_force_min_support(problem, make_solution([2.0, 0.0])), 1)
        zero = Problem(np.eye(2), [0.5, -0.5], 1.0)
        self.assertEqual(brute_force_min_support(zero, make_solution([0.0, 0.0])), 0)
        large = Problem(np.ones((2, 15)), [1.0, 1.0], 0.1)
        with self.assertRaises(TooLarge):
            brute_force_min_support(large, make_solution(np.zeros(15)))

    def test_minimal_support_on_collinear_designs(self):
        for index, stream in enumerate(spawn_streams(42, 10)):
            problem = duplicated_instance(stream)
            solution = solve(problem)
            reduced = reduce(problem, solution)
            mu = problem.A @ solution.x_hat
            l1_norm = np.sum(np.abs(solution.x_hat))
            # same response, same l1 norm, full column rank
            assert_allclose(problem.A @ reduced.x_star, mu, atol=1e-9 * max(1.0, np.linalg.norm(mu)))
            self.assertAlmostEqual(np.sum(np.abs(reduced.x_star)), l1_norm, delta=1e-9 * max(1.0, l1_norm))
            self.assertEqual(numerical_rank(problem.A[:, reduced.support]).rank, reduced.support.size)
            self.assertLessEqual(reduced.reduction_steps, solution.support.size)
            expected = brute_force_min_support(problem, solution)
            if reduced.support.size != expected:
                # only allowed on a hyperplane of observations
                self.assertFalse(in_G_lambda(problem).member, f'instance {index}')

    def test_response_unique_across_optima(self):
        for stream in spawn_streams(7, 5):
            problem = duplicated_instance(stream)
            solution = solve(problem)
            other = translate(problem, solution)
            assert_allclose(problem.A @ other, problem.A @ solution.x_hat, atol=1e-7)
            # every point of the segment is optimal
            self.assertTrue(kkt_check(problem, other, 1e-7).is_optimal)
            self.assertAlmostEqual(objective(problem, other), objective(problem, solution.x_hat), delta=1e-8)
            spread = make_solution(other)
            reduced = reduce(problem, spread)
            self.assertTrue(reduced.support.size <= solution.support.size)
            self.assertLessEqual(reduced.reduction_steps, spread.support.size)


if __name__ == '__main__':
    unittest.main()
