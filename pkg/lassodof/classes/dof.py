# built-in imports
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

# third-party imports
import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

# custom imports
from .designs import make_generator
from .solver import Problem, LassoSolution, SolverOptions, solve, detect_support
from .support import ReducedSolution, reduce
from ..utils import (DimensionMismatch, TooLarge, numerical_rank, pseudo_inverse, projector,
                     complement_projector)
from ..utils.constants import (G_LAMBDA_MAX_P, MEMBERSHIP_RELATIVE_TOLERANCE, FD_RELATIVE_DELTA)

logger = logging.getLogger(__name__)


@dataclass
class RiskReport:
    """
    SURE, squared error and degrees of freedom of one Lasso response

    se is None unless the true mean mu was supplied (simulation only).
    """
    dof: int
    sure: float
    se: Optional[float]
    residual_sq: float
    sigma: float
    n: int
    p: int
    lam: float

    def to_dict(self) -> dict:
        return {'dof': int(self.dof), 'sure': float(self.sure),
                'se': None if self.se is None else float(self.se),
                'residual_sq': float(self.residual_sq), 'sigma': float(self.sigma),
                'n': int(self.n), 'p': int(self.p), 'lambda': float(self.lam)}

    @classmethod
    def from_dict(cls, document: dict) -> 'RiskReport':
        return cls(dof=int(document['dof']), sure=float(document['sure']),
                   se=None if document.get('se') is None else float(document['se']),
                   residual_sq=float(document['residual_sq']), sigma=float(document['sigma']),
                   n=int(document['n']), p=int(document['p']), lam=float(document['lambda']))


@dataclass(frozen=True)
class HyperplaneQuery:
    """
    index (I, j, S) of the hyperplane pair <P_{V_I perp}(a_j), u> = +-lam (1 - <a_j, (A_I^+)^T S>)

    indices are 0-based; describe() prints them 1-based
    """
    I: tuple
    j: int
    S: tuple
    lam: float

    def describe(self) -> str:
        indices = ', '.join(str(i + 1) for i in self.I)
        signs = ', '.join('+1' if s > 0 else '-1' for s in self.S)
        return f'I={{{indices}}}, j={self.j + 1}, S=({signs})'


@dataclass(frozen=True)
class GMembership:
    member: bool
    witness: Optional[HyperplaneQuery] = None

    def __bool__(self):
        return self.member


@dataclass(frozen=True)
class DivergenceReport:
    value: float
    delta: float
    support_changes: int


def dof_estimate(reduced: ReducedSolution) -> int:
    """
    |I*|, the divergence of the Lasso response at generic y
    """
    return int(reduced.support.size)


def rank_dof_estimate(problem: Problem, sol: LassoSolution) -> int:
    """
    rank(A_I) for the support I of any minimizer, equal to |I*| at generic y
    """
    support = detect_support(sol.x_hat)
    if support.size == 0:
        return 0
    return numerical_rank(problem.A[:, support]).rank


def squared_error(mu_hat, mu) -> float:
    mu_hat = np.asarray(mu_hat, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if mu_hat.shape != mu.shape:
        raise DimensionMismatch(f'response has shape {mu_hat.shape} but the mean has shape {mu.shape}')
    difference = mu_hat - mu
    return float(difference @ difference)


def sure(problem: Problem, reduced: ReducedSolution, sigma: float) -> float:
    """
    Stein unbiased risk estimate -n sigma^2 + ||A x* - y||^2 + 2 sigma^2 |I*|
    """
    if not sigma > 0:
        raise ValueError(f'sigma must be positive, got {sigma}')
    residual = problem.A @ reduced.x_star - problem.y
    return -problem.n * sigma ** 2 + float(residual @ residual) + 2.0 * sigma ** 2 * dof_estimate(reduced)


def risk_report(problem: Problem, reduced: ReducedSolution, sigma: float, mu=None) -> RiskReport:
    mu_hat = problem.A @ reduced.x_star
    residual = mu_hat - problem.y
    residual_sq = float(residual @ residual)
    dof = dof_estimate(reduced)
    value = sure(problem, reduced, sigma)
    se = None if mu is None else squared_error(mu_hat, mu)
    return RiskReport(dof=dof, sure=value, se=se, residual_sq=residual_sq, sigma=sigma,
                      n=problem.n, p=problem.p, lam=problem.lam)


def _perturbed_solve(problem: Problem, index: int, step: float, options: SolverOptions, x0):
    y = problem.y.copy()
    y[index] += step
    with threadpool_limits(limits=1):
        solution = solve(problem.with_observation(y), options, x0=x0)
    return problem.A @ solution.x_hat, solution


def divergence_fd_report(problem: Problem, delta: Optional[float] = None,
                         options: Optional[SolverOptions] = None, n_jobs: int = 1,
                         reduced: Optional[ReducedSolution] = None) -> DivergenceReport:
    """
    central finite-difference estimate of sum_i d mu_i / d y_i

    solves the 2n problems y +- delta e_i warm started at x*, in parallel when n_jobs > 1;
    perturbed solves whose support or signs differ from I*, S* are counted, not hidden.

    Parameters:
    - problem (Problem): the Lasso instance.
    - delta (float, optional): step, 1e-5 (1 + ||y||) by default.
    - options (SolverOptions, optional): solver settings of every perturbed solve.
    - n_jobs (int): joblib workers.
    - reduced (ReducedSolution, optional): reduced solution at y, computed when missing.

    Returns:
    - DivergenceReport: value, step used and number of support changes.
    """
    options = options if options is not None else SolverOptions()
    if delta is None:
        delta = FD_RELATIVE_DELTA * (1.0 + float(np.linalg.norm(problem.y)))
    if not delta > 0:
        raise ValueError(f'delta must be positive, got {delta}')
    if reduced is None:
        reduced = reduce(problem, solve(problem, options), options.kkt_tolerance, options.support_tolerance)

    tasks = [(index, sign * delta) for index in range(problem.n) for sign in (1.0, -1.0)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_perturbed_solve)(problem, index, step, options, reduced.x_star) for index, step in tasks)

    changes = 0
    partials = np.zeros(problem.n)
    for (index, step), (mu, solution) in zip(tasks, results):
        partials[index] += math.copysign(1.0, step) * mu[index] / (2.0 * delta)
        perturbed = reduce(problem.with_observation(problem.y + step * np.eye(problem.n)[index]), solution,
                           options.kkt_tolerance, options.support_tolerance)
        if not (np.array_equal(perturbed.support, reduced.support)
                and np.array_equal(perturbed.signs, reduced.signs)):
            changes += 1

    if changes:
        logger.warning('%d of %d perturbed solves changed support or signs, y is likely not generic',
                       changes, len(tasks))
    # fixed order summation
    return DivergenceReport(value=float(math.fsum(partials)), delta=delta, support_changes=changes)


def divergence_fd(problem: Problem, delta: Optional[float] = None,
                  options: Optional[SolverOptions] = None, n_jobs: int = 1) -> float:
    return divergence_fd_report(problem, delta, options, n_jobs).value


def in_G_lambda(problem: Problem, tol: Optional[float] = None,
                max_p: int = G_LAMBDA_MAX_P) -> GMembership:
    """
    test whether y avoids every hyperplane H_{I,j,S} with (I, j, S) in Omega

    enumerates the index sets I with full column rank A_I (|I| <= rank A, empty set included),
    every j with a_j outside span(A_I) and every sign vector S; the first violated hyperplane in
    that order is returned as witness.
    raise TooLarge when p exceeds max_p
    """
    if problem.p > max_p:
        raise TooLarge(f'hyperplane enumeration limited to p <= {max_p}, got p = {problem.p}')
    tol = MEMBERSHIP_RELATIVE_TOLERANCE * problem.lam if tol is None else tol
    A, y, lam = problem.A, problem.y, problem.lam
    max_size = numerical_rank(A).rank
    column_norms = np.linalg.norm(A, axis=0)

    for size in range(0, max_size + 1):
        # one row per sign vector, a single empty row when I is empty
        sign_vectors = np.array(list(itertools.product((1.0, -1.0), repeat=size)),
                                dtype=float).reshape(2 ** size, size)
        for subset in itertools.combinations(range(problem.p), size):
            active = A[:, list(subset)]
            if size and numerical_rank(active).rank < size:
                continue
            complement = complement_projector(active) if size else np.eye(problem.n)
            # columns of directions are (A_I^+)^T S for every S
            directions = pseudo_inverse(active).T @ sign_vectors.T if size \
                else np.zeros((problem.n, 1))

            for j in range(problem.p):
                if j in subset:
                    continue
                orthogonal = complement @ A[:, j]
                if np.linalg.norm(orthogonal) <= 1e-9 * max(column_norms[j], 1e-300):
                    continue
                lhs = float(orthogonal @ y)
                offsets = lam * (1.0 - A[:, j] @ directions)
                hits = np.flatnonzero((np.abs(lhs - offsets) <= tol) | (np.abs(lhs + offsets) <= tol))
                if hits.size:
                    signs = tuple(sign_vectors[hits[0]]) if size else ()
                    return GMembership(False, HyperplaneQuery(tuple(subset), j, signs, lam))
    return GMembership(True)


def local_affinity_check(problem: Problem, reduced: ReducedSolution, epsilon: float, trials: int,
                         seed: int = 0, options: Optional[SolverOptions] = None) -> float:
    """
    max over random z in the ball B(y, epsilon) of ||mu(z) - mu(y) - P_{V_I*}(z - y)||

    y is tested against G_lambda when p is small enough, a warning names the hyperplane it lies on
    """
    if epsilon < 0:
        raise ValueError(f'epsilon must be nonnegative, got {epsilon}')
    if problem.p <= G_LAMBDA_MAX_P:
        membership = in_G_lambda(problem)
        if not membership:
            logger.warning('y lies on the hyperplane %s, the response need not be affine around it',
                           membership.witness.describe())
    options = options if options is not None else SolverOptions()
    rng = make_generator(seed)
    mu_y = problem.A @ reduced.x_star
    projection = projector(problem.A[:, reduced.support]) if reduced.support.size \
        else np.zeros((problem.n, problem.n))

    deviation = 0.0
    for _ in range(trials):
        direction = rng.standard_normal(problem.n)
        direction /= np.linalg.norm(direction)
        radius = epsilon * rng.uniform() ** (1.0 / problem.n)
        z = problem.y + radius * direction
        solution = solve(problem.with_observation(z), options, x0=reduced.x_star)
        gap = problem.A @ solution.x_hat - mu_y - projection @ (z - problem.y)
        deviation = max(deviation, float(np.linalg.norm(gap)))
    return deviation
