"""
Reduction of a Lasso solution to an optimal solution whose active matrix has full column rank.

Starting from any minimizer x with support I, a kernel vector h of A_I keeps the response A x
unchanged; along the segment x + t h the signs stay constant, so the l1 norm stays constant as
well and every point is optimal. Walking to the first point where an entry vanishes shrinks the
support; repeating until A_I has full column rank gives the support I* whose size is the degrees
of freedom estimate.
"""
# built-in imports
import itertools
import logging
from dataclasses import dataclass
from typing import Optional

# third-party imports
import numpy as np
from scipy.optimize import nnls

# custom imports
from .solver import (Problem, LassoSolution, kkt_check, detect_support, support_threshold)
from ..utils import (NotOptimalInput, TooLarge, kernel_vector, numerical_rank, pseudo_inverse,
                     projector)
from ..utils.constants import (KKT_TOLERANCE, RANK_TOLERANCE, BRUTE_FORCE_MAX_P, ORACLE_TOLERANCE,
                               EQUICORRELATION_SLACK)

logger = logging.getLogger(__name__)


@dataclass
class ReducedSolution:
    x_star: np.ndarray
    support: np.ndarray
    signs: np.ndarray
    active_rank: int
    reduction_steps: int

    def direction(self, A) -> np.ndarray:
        """
        d_{I*,S*} = (A_{I*}^+)^T S*
        """
        A = np.asarray(A, dtype=float)
        if self.support.size == 0:
            return np.zeros(A.shape[0])
        return pseudo_inverse(A[:, self.support]).T @ self.signs

    def to_dict(self) -> dict:
        return dict(x_star=self.x_star.tolist(), support=self.support.tolist(),
                    signs=self.signs.astype(int).tolist(), active_rank=int(self.active_rank),
                    reduction_steps=int(self.reduction_steps))


def _segment_step(x_active, h):
    """
    smallest t > 0 such that x_active + t h has a zero entry, and that entry

    ties go to the lowest index; return None if no entry decreases towards zero along h
    """
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = np.where(h != 0, -x_active / h, np.inf)
    ratios[ratios <= 0] = np.inf
    if not np.any(np.isfinite(ratios)):
        return None
    index = int(np.argmin(ratios))
    return float(ratios[index]), index


def reduce(problem: Problem, sol: LassoSolution, kkt_tolerance: float = KKT_TOLERANCE,
           support_tolerance: Optional[float] = None, rank_tol: float = RANK_TOLERANCE) -> ReducedSolution:
    """
    optimal solution with full column rank active matrix, same response and same l1 norm

    Parameters:
    - problem (Problem): the Lasso instance.
    - sol (LassoSolution): any optimal solution of it.
    - kkt_tolerance (float): tolerance of the optimality certificate required from sol.
    - support_tolerance (float, optional): absolute support threshold, relative detection if None.
    - rank_tol (float): relative tolerance of the rank tests.

    Returns:
    - ReducedSolution: x_star, its support I*, signs S*, rank of A_I* and the number of steps.
    """
    report = kkt_check(problem, sol.x_hat, kkt_tolerance, support_tolerance)
    if not report.is_optimal:
        raise NotOptimalInput(f'input solution is not optimal (interior residual {report.interior_residual:.3e}, '
                              f'boundary excess {report.boundary_excess:.3e})')

    x = np.array(sol.x_hat, dtype=float)
    # entries below the support threshold are treated as exact zeros
    x[np.abs(x) <= support_threshold(x, support_tolerance)] = 0.0
    steps = 0

    while True:
        support = detect_support(x, support_tolerance)
        if support.size == 0:
            rank = 0
            break
        active = problem.A[:, support]
        rank = numerical_rank(active, rank_tol).rank
        if rank == support.size:
            break

        h = kernel_vector(active, rank_tol)
        hit = _segment_step(x[support], h)
        if hit is None:
            h = -h
            hit = _segment_step(x[support], h)
        t0, index = hit

        x[support] += t0 * h
        x[support[index]] = 0.0
        # a step can zero several entries at once in degenerate ties
        x[np.abs(x) <= support_threshold(x, support_tolerance)] = 0.0
        steps += 1
        logger.debug('reduction step %d: t0 = %.3e, dropped index %d, rank %d of %d',
                     steps, t0, support[index], rank, support.size)

    return ReducedSolution(x_star=x, support=support, signs=np.sign(x[support]),
                           active_rank=rank, reduction_steps=steps)


def translate(problem: Problem, sol: LassoSolution, fraction: float = 0.5,
              rank_tol: float = RANK_TOLERANCE) -> np.ndarray:
    """
    another minimizer x + t h inside the segment where the signs are constant

    t is `fraction` of the largest admissible step min_j |x_j| / ||h||_inf; the input is returned
    unchanged when A_I has full column rank
    """
    x = np.array(sol.x_hat, dtype=float)
    support = detect_support(x)
    if support.size == 0:
        return x
    active = problem.A[:, support]
    if numerical_rank(active, rank_tol).rank == support.size:
        return x
    h = kernel_vector(active, rank_tol)
    limit = np.min(np.abs(x[support])) / np.max(np.abs(h))
    x[support] += fraction * limit * h
    return x


def implicit_response(problem: Problem, reduced: ReducedSolution) -> np.ndarray:
    """
    P_{V_I*}(y) - lam d_{I*,S*}, equal to the Lasso response
    """
    active = problem.A[:, reduced.support]
    return projector(active) @ problem.y - problem.lam * reduced.direction(problem.A)


def brute_force_min_support(problem: Problem, sol: LassoSolution,
                            tol: float = ORACLE_TOLERANCE) -> int:
    """
    smallest |J| such that some x supported on J has A x = A x_hat and ||x||_1 = ||x_hat||_1

    every minimizer lives on the equicorrelation set {j : |<a_j, y - mu>| = lam} with the signs of
    the correlations, so the subsets of that set are enumerated by size and each one is tested with
    a sign-constrained nonnegative least squares fit.
    raise TooLarge when p > 14
    """
    if problem.p > BRUTE_FORCE_MAX_P:
        raise TooLarge(f'brute force enumeration limited to p <= {BRUTE_FORCE_MAX_P}, got p = {problem.p}')

    mu = problem.A @ sol.x_hat
    l1_norm = float(np.sum(np.abs(sol.x_hat)))
    if np.linalg.norm(mu) <= tol and l1_norm <= tol:
        return 0

    correlation = problem.A.T @ (problem.y - mu)
    equicorrelation = np.flatnonzero(np.abs(correlation) >= problem.lam * (1.0 - EQUICORRELATION_SLACK))
    signs = np.sign(correlation)

    for size in range(1, equicorrelation.size + 1):
        for subset in itertools.combinations(equicorrelation, size):
            subset = np.asarray(subset)
            signed_columns = problem.A[:, subset] * signs[subset]
            magnitudes, _ = nnls(signed_columns, mu)
            candidate = np.zeros(problem.p)
            candidate[subset] = signs[subset] * magnitudes
            if np.linalg.norm(problem.A @ candidate - mu) <= tol * max(1.0, np.linalg.norm(mu)) \
                    and abs(np.sum(np.abs(candidate)) - l1_norm) <= tol * max(1.0, l1_norm):
                return size

    # only reachable when the input is not optimal
    raise NotOptimalInput('no support reproduces the response and the l1 norm of the input')
