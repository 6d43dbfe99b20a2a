# built-in imports
import logging
from dataclasses import dataclass
from typing import Optional

# third-party imports
import numpy as np

# custom imports
from ..utils import DimensionMismatch, InvalidSpec, NotConverged, gram_solve
from ..utils.constants import (KKT_TOLERANCE, SUPPORT_RELATIVE_TOLERANCE, SUPPORT_ABSOLUTE_FLOOR,
                               MAX_ITERATIONS, KKT_CHECK_EVERY, POWER_ITERATIONS, POWER_TOLERANCE,
                               LIPSCHITZ_SAFETY, POLISH_RETRY_ITERATIONS)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Problem:
    """
    Lasso instance: minimize 1/2 ||y - A x||^2 + lam ||x||_1

    ex: problem = Problem(A, y, 0.3)
    """
    A: np.ndarray
    y: np.ndarray
    lam: float

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.lam = float(self.lam)
        if self.A.ndim != 2:
            raise DimensionMismatch(f'design must be a matrix, got {self.A.ndim} dimensions')
        if self.A.shape[0] != self.y.shape[0]:
            raise DimensionMismatch(
                f'design has {self.A.shape[0]} rows (n x p = {self.A.shape[0]} x {self.A.shape[1]}) '
                f'but the observation has length {self.y.shape[0]}')
        if not self.lam > 0:
            raise InvalidSpec(f'lambda must be positive, got {self.lam}')
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.y)) and np.isfinite(self.lam)):
            raise InvalidSpec('problem has non finite entries')

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.A.shape[1]

    def with_observation(self, y) -> 'Problem':
        return Problem(self.A, y, self.lam)

    def scaled(self, c: float) -> 'Problem':
        # (c y, c lam) has solution c x
        return Problem(self.A, c * self.y, c * self.lam)


@dataclass
class SolverOptions:
    """
    tolerances and iteration budget of the proximal gradient solver

    support_tolerance None means relative detection max(1e-9 ||x||_inf, 1e-12);
    step_size None means 1/L with L estimated by power iteration.
    """
    max_iterations: int = MAX_ITERATIONS
    kkt_tolerance: float = KKT_TOLERANCE
    support_tolerance: Optional[float] = None
    step_size: Optional[float] = None
    acceleration: bool = False
    check_every: int = KKT_CHECK_EVERY
    polish: bool = True

    def validate(self):
        if self.max_iterations < 1:
            raise InvalidSpec('max_iterations must be at least 1')
        if not self.kkt_tolerance > 0:
            raise InvalidSpec('kkt_tolerance must be positive')
        if self.support_tolerance is not None and not self.support_tolerance > 0:
            raise InvalidSpec('support_tolerance must be positive')
        if self.step_size is not None and not self.step_size > 0:
            raise InvalidSpec(f"step_size must be positive, got {self.step_size}")

    def to_dict(self) -> dict:
        return dict(max_iterations=self.max_iterations, kkt_tolerance=self.kkt_tolerance,
                    support_tolerance=self.support_tolerance, step_size=self.step_size,
                    acceleration=self.acceleration)

    @classmethod
    def from_dict(cls, document: dict) -> 'SolverOptions':
        known = {key: document[key] for key in ('max_iterations', 'kkt_tolerance', 'support_tolerance',
                                                'step_size', 'acceleration', 'check_every', 'polish')
                 if key in document}
        return cls(**known)


@dataclass(frozen=True)
class KKTReport:
    interior_residual: float
    boundary_excess: float
    is_optimal: bool

    @property
    def residual(self) -> float:
        return max(self.interior_residual, self.boundary_excess)


@dataclass
class LassoSolution:
    x_hat: np.ndarray
    support: np.ndarray
    signs: np.ndarray
    iterations_used: int
    kkt_residual: float
    objective: float = float('nan')
    polished: bool = False

    def to_dict(self) -> dict:
        return dict(x_hat=self.x_hat.tolist(), support=self.support.tolist(),
                    signs=self.signs.astype(int).tolist(), iterations_used=int(self.iterations_used),
                    kkt_residual=float(self.kkt_residual), objective=float(self.objective),
                    polished=bool(self.polished))

    @classmethod
    def from_dict(cls, document: dict) -> 'LassoSolution':
        x_hat = np.asarray(document['x_hat'], dtype=float)
        return cls(x_hat=x_hat,
                   support=np.asarray(document['support'], dtype=int),
                   signs=np.asarray(document['signs'], dtype=float),
                   iterations_used=int(document.get('iterations_used', 0)),
                   kkt_residual=float(document.get('kkt_residual', np.nan)),
                   objective=float(document.get('objective', np.nan)),
                   polished=bool(document.get('polished', False)))


def soft_threshold(v, t: float) -> np.ndarray:
    """
    proximity operator of t ||.||_1, componentwise sign(v) max(|v| - t, 0)
    """
    if t < 0:
        raise ValueError(f'threshold must be nonnegative, got {t}')
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def objective(problem: Problem, x) -> float:
    residual = problem.y - problem.A @ x
    return 0.5 * float(residual @ residual) + problem.lam * float(np.sum(np.abs(x)))


def response(problem: Problem, x) -> np.ndarray:
    """
    A x, the Lasso response when x is optimal (identical for every minimizer)
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.p,):
        raise DimensionMismatch(f'coefficient vector has shape {x.shape}, expected ({problem.p},)')
    return problem.A @ x


def support_threshold(x, support_tolerance: Optional[float] = None) -> float:
    if support_tolerance is not None:
        return support_tolerance
    largest = float(np.max(np.abs(x))) if np.size(x) else 0.0
    return max(SUPPORT_RELATIVE_TOLERANCE * largest, SUPPORT_ABSOLUTE_FLOOR)


def detect_support(x, support_tolerance: Optional[float] = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.flatnonzero(np.abs(x) > support_threshold(x, support_tolerance))


def kkt_check(problem: Problem, x, kkt_tolerance: float = KKT_TOLERANCE,
              support_tolerance: Optional[float] = None) -> KKTReport:
    """
    optimality certificate of x

    interior residual: ||A_I^T (y - A x) - lam sign(x_I)||_inf on the detected support I
    boundary excess: max(0, max_{j not in I} |<a_j, y - A x>| - lam)
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.p,):
        raise DimensionMismatch(f'coefficient vector has shape {x.shape}, expected ({problem.p},)')

    support = detect_support(x, support_tolerance)
    correlation = problem.A.T @ (problem.y - problem.A @ x)

    interior = 0.0
    if support.size:
        interior = float(np.max(np.abs(correlation[support] - problem.lam * np.sign(x[support]))))

    off_support = np.ones(problem.p, dtype=bool)
    off_support[support] = False
    boundary = 0.0
    if np.any(off_support):
        boundary = max(0.0, float(np.max(np.abs(correlation[off_support]))) - problem.lam)

    return KKTReport(interior, boundary, interior <= kkt_tolerance and boundary <= kkt_tolerance)


def lipschitz_constant(A, n_iterations: int = POWER_ITERATIONS, tol: float = POWER_TOLERANCE) -> float:
    """
    largest eigenvalue of A^T A by power iteration from a deterministic start

    Parameters:
    - A (np.ndarray): design matrix.
    - n_iterations (int): maximum number of power iterations.
    - tol (float): relative change of the Rayleigh quotient that stops the iteration.

    Returns:
    - float: estimate of the squared spectral norm of A.
    """
    A = np.asarray(A, dtype=float)
    vector = np.ones(A.shape[1]) / np.sqrt(A.shape[1])
    # break symmetries of structured designs with a fixed perturbation
    vector += 1e-3 * np.cos(np.arange(A.shape[1]))
    vector /= np.linalg.norm(vector)

    estimate = 0.0
    for _ in range(n_iterations):
        image = A.T @ (A @ vector)
        rayleigh = float(vector @ image)
        norm = np.linalg.norm(image)
        if norm == 0:
            return 0.0
        vector = image / norm
        if abs(rayleigh - estimate) <= tol * max(abs(rayleigh), 1.0):
            estimate = rayleigh
            break
        estimate = rayleigh
    return max(estimate, float(np.linalg.norm(A @ vector)) ** 2)


def polish(problem: Problem, x, support: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """
    Newton step on a fixed support and sign pattern

    solves A_I^T (y - A_I x_I) = lam s in the minimum-norm sense starting from x; with A_I of full
    column rank the result is x_I = A_I^+ y - lam (A_I^T A_I)^-1 s whatever the starting point
    """
    candidate = np.zeros(problem.p)
    if support.size == 0:
        return candidate
    active = problem.A[:, support]
    candidate[support] = x[support]
    gradient = active.T @ (problem.y - active @ x[support]) - problem.lam * signs
    candidate[support] += gram_solve(active, gradient)
    return candidate


class ProximalGradientSolver:
    """
    iterative soft-thresholding for the Lasso, with optional momentum and adaptive restart

    the KKT conditions are checked every `check_every` iterations and are the only stopping rule.
    cost keeps the objective of every iterate.

    ex: solver = ProximalGradientSolver(problem, SolverOptions())
        solution = solver.run()
    """

    def __init__(self, problem: Problem, options: Optional[SolverOptions] = None):
        self.problem = problem
        self.options = options if options is not None else SolverOptions()
        self.step_size = None
        self.x = None
        self.x_previous = None
        self.z = None
        self.momentum = 1.0
        self.iteration = 0
        self.cost = []
        self._last_pattern = None
        self._failed_polish = None

    def setup(self, x0=None):
        """
        fix the step size and the starting point, zero unless a warm start x0 is given
        """
        self.options.validate()
        if self.options.step_size is not None:
            self.step_size = self.options.step_size
        else:
            lipschitz = lipschitz_constant(self.problem.A) * LIPSCHITZ_SAFETY
            self.step_size = 1.0 / lipschitz if lipschitz > 0 else 1.0

        self.x = np.zeros(self.problem.p) if x0 is None else np.array(x0, dtype=float)
        if self.x.shape != (self.problem.p,):
            raise DimensionMismatch(f'warm start has shape {self.x.shape}, expected ({self.problem.p},)')
        self.x_previous = self.x.copy()
        self.z = self.x.copy()
        self.momentum = 1.0
        self.iteration = 0
        self.cost = [objective(self.problem, self.x)]
        self._last_pattern = self._pattern(self.x)
        self._failed_polish = None

    def step(self):
        A, y, lam = self.problem.A, self.problem.y, self.problem.lam
        gradient = A.T @ (A @ self.z - y)
        x_new = soft_threshold(self.z - self.step_size * gradient, self.step_size * lam)
        cost = objective(self.problem, x_new)

        if self.options.acceleration:
            if cost > self.cost[-1]:
                # restart momentum from the last iterate
                self.momentum = 1.0
                self.z = self.x.copy()
                gradient = A.T @ (A @ self.z - y)
                x_new = soft_threshold(self.z - self.step_size * gradient, self.step_size * lam)
                cost = objective(self.problem, x_new)
            momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * self.momentum ** 2))
            self.z = x_new + ((self.momentum - 1.0) / momentum_next) * (x_new - self.x)
            self.momentum = momentum_next
        else:
            self.z = x_new

        self.x_previous = self.x
        self.x = x_new
        self.iteration += 1
        self.cost.append(cost)
        return self.x

    def _pattern(self, x):
        support = detect_support(x, self.options.support_tolerance)
        return support, np.sign(x[support])

    def _clean(self, x):
        cleaned = np.array(x, dtype=float)
        cleaned[np.abs(cleaned) <= support_threshold(cleaned, self.options.support_tolerance)] = 0.0
        return cleaned

    def _certify(self, x):
        return kkt_check(self.problem, x, self.options.kkt_tolerance, self.options.support_tolerance)

    def _try_polish(self):
        support, signs = self._pattern(self.x)
        last_support, last_signs = self._last_pattern
        self._last_pattern = (support, signs)
        stable = np.array_equal(support, last_support) and np.array_equal(signs, last_signs)
        if not stable:
            return None
        if self._failed_polish is not None:
            failed_support, failed_signs, failed_at = self._failed_polish
            # same pattern already failed recently
            if np.array_equal(failed_support, support) and np.array_equal(failed_signs, signs) \
                    and self.iteration - failed_at < POLISH_RETRY_ITERATIONS:
                return None

        candidate = self._clean(polish(self.problem, self.x, support, signs))
        report = self._certify(candidate)
        if report.is_optimal:
            return candidate, report
        self._failed_polish = (support, signs, self.iteration)
        return None

    def finalize(self, x, report: 'KKTReport', polished: bool) -> LassoSolution:
        support = detect_support(x, self.options.support_tolerance)
        logger.debug('solver stopped after %d iterations, kkt residual %.3e, |I| = %d',
                     self.iteration, report.residual, support.size)
        return LassoSolution(x_hat=x, support=support, signs=np.sign(x[support]),
                             iterations_used=self.iteration, kkt_residual=report.residual,
                             objective=objective(self.problem, x), polished=polished)

    def run(self, x0=None) -> LassoSolution:
        """
        iterate until the KKT certificate holds

        raise NotConverged with the last iterate when max_iterations is reached
        """
        self.setup(x0)
        report = self._certify(self.x)
        if report.is_optimal:
            return self.finalize(self.x, report, polished=False)

        while self.iteration < self.options.max_iterations:
            self.step()
            if self.iteration % self.options.check_every:
                continue

            report = self._certify(self.x)
            if report.is_optimal:
                return self.finalize(self.x, report, polished=False)
            if self.options.polish:
                polished = self._try_polish()
                if polished is not None:
                    return self.finalize(polished[0], polished[1], polished=True)

        report = self._certify(self.x)
        if report.is_optimal:
            return self.finalize(self.x, report, polished=False)
        raise NotConverged(f'no KKT certificate after {self.iteration} iterations '
                           f'(residual {report.residual:.3e})',
                           last_iterate=self.x.copy(), residual=report.residual,
                           iterations=self.iteration)


def solve(problem: Problem, opts: Optional[SolverOptions] = None, x0=None) -> LassoSolution:
    return ProximalGradientSolver(problem, opts).run(x0)
