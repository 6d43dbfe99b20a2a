# built in imports
import unittest

# third-party imports
import numpy as np
from numpy.testing import assert_allclose
from sklearn.linear_model import Lasso

# custom imports
from lassodof.classes import (Problem, SolverOptions, ProximalGradientSolver, LassoSolution, soft_threshold,
                              objective, response, kkt_check, lipschitz_constant, solve, DesignSpec,
                              make_design)
from lassodof.utils import DESIGN_KIND, DimensionMismatch, InvalidSpec, NotConverged


def random_problem(seed, n=20, p=40, ratio=0.3):
    A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, n, p, seed=seed))
    y = np.random.default_rng(seed).standard_normal(n)
    return Problem(A, y, ratio * np.max(np.abs(A.T @ y)))


class TestSolver(unittest.TestCase):

    def setUp(self):
        self.identity = Problem(np.eye(2), [3.0, -1.0], 1.0)
        self.counterexample_A = np.array([[1.0, 1.0], [0.0, 1.0]])
        self.problem = random_problem(0)

    def test_soft_threshold(self):
        assert_allclose(soft_threshold([3.0, -1.0, 0.5], 1.0), [2.0, 0.0, 0.0])
        with self.assertRaises(ValueError):
            soft_threshold([1.0], -1.0)

    def test_identity(self):
        solution = solve(self.identity)
        assert_allclose(solution.x_hat, [2.0, 0.0], atol=1e-8)
        self.assertEqual(solution.support.tolist(), [0])
        self.assertEqual(solution.signs.tolist(), [1.0])

    def test_counterexample(self):
        solution = solve(Problem(self.counterexample_A, [1.0, 0.0], 0.3))
        assert_allclose(solution.x_hat, [0.7, 0.0], atol=1e-8)
        solution = solve(Problem(self.counterexample_A, [1.0, 0.2], 0.3))
        assert_allclose(solution.x_hat, [0.5, 0.2], atol=1e-8)

    def test_zero_solution(self):
        problem = Problem(self.counterexample_A, [1.0, 0.2], 1.3)
        solution = solve(problem)
        assert_allclose(solution.x_hat, np.zeros(2))
        self.assertEqual(solution.iterations_used, 0)
        self.assertEqual(solution.support.size, 0)

    def test_kkt_certificate(self):
        for seed in range(5):
            problem = random_problem(seed)
            for acceleration in (False, True):
                solution = solve(problem, SolverOptions(acceleration=acceleration))
                self.assertTrue(kkt_check(problem, solution.x_hat, 1e-8).is_optimal)
                self.assertAlmostEqual(solution.objective, objective(problem, solution.x_hat))
                # x = 0 is feasible
                self.assertLessEqual(solution.objective, 0.5 * float(problem.y @ problem.y))

    def test_sklearn_oracle(self):
        for seed in range(3):
            problem = random_problem(seed, n=30, p=60, ratio=0.2)
            solution = solve(problem)
            model = Lasso(alpha=problem.lam / problem.n, fit_intercept=False, tol=1e-12, max_iter=200_000)
            model.fit(problem.A, problem.y)
            self.assertLessEqual(objective(problem, solution.x_hat), objective(problem, model.coef_) + 1e-9)
            assert_allclose(response(problem, solution.x_hat), problem.A @ model.coef_, atol=1e-4)

    def test_acceleration_agrees(self):
        plain = solve(self.problem, SolverOptions(acceleration=False))
        accelerated = solve(self.problem, SolverOptions(acceleration=True))
        assert_allclose(self.problem.A @ plain.x_hat, self.problem.A @ accelerated.x_hat, atol=1e-7)

    def test_homogeneity(self):
        solution = solve(self.problem)
        scaled = solve(self.problem.scaled(2.0))
        assert_allclose(scaled.x_hat, 2.0 * solution.x_hat, atol=1e-7)

    def test_warm_start(self):
        solution = solve(self.problem)
        again = solve(self.problem, x0=solution.x_hat)
        self.assertEqual(again.iterations_used, 0)
        with self.assertRaises(DimensionMismatch):
            solve(self.problem, x0=np.zeros(3))

    def test_monotone_cost(self):
        solver = ProximalGradientSolver(self.problem, SolverOptions(polish=False))
        solver.run()
        cost = np.array(solver.cost)
        self.assertTrue(np.all(np.diff(cost) <= 1e-12 * np.maximum(1.0, cost[:-1])))

    def test_not_converged(self):
        with self.assertRaises(NotConverged) as context:
            solve(self.problem, SolverOptions(max_iterations=5, polish=False))
        self.assertEqual(context.exception.iterations, 5)
        self.assertEqual(context.exception.last_iterate.shape, (self.problem.p,))
        self.assertGreater(context.exception.residual, 1e-9)

    def test_lipschitz(self):
        largest = np.linalg.norm(self.problem.A, 2) ** 2
        estimate = lipschitz_constant(self.problem.A)
        self.assertLessEqual(estimate, largest * (1 + 1e-10))
        self.assertGreater(estimate, largest / 1.05)

    def test_validation(self):
        with self.assertRaises(DimensionMismatch) as context:
            Problem(np.eye(2), [1.0, 2.0, 3.0], 1.0)
        self.assertIn('2 x 2', str(context.exception))
        self.assertIn('length 3', str(context.exception))
        with self.assertRaises(InvalidSpec):
            Problem(np.eye(2), [1.0, 2.0], 0.0)
        with self.assertRaises(InvalidSpec):
            solve(self.identity, SolverOptions(kkt_tolerance=-1.0))

    def test_solution_document(self):
        solution = solve(self.identity)
        restored = LassoSolution.from_dict(solution.to_dict())
        assert_allclose(restored.x_hat, solution.x_hat)
        self.assertTrue(kkt_check(self.identity, restored.x_hat).is_optimal)


if __name__ == '__main__':
    unittest.main()
