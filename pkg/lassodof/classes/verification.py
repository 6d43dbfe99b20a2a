# built-in imports
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

# third-party imports
import numpy as np

# custom imports
from .designs import DesignSpec, SignalSpec, NoiseSpec, make_design, make_signal, observe, spawn_streams
from .solver import Problem, SolverOptions, solve
from .support import reduce, brute_force_min_support
from .dof import dof_estimate, sure, in_G_lambda, divergence_fd_report, local_affinity_check
from ..utils import DESIGN_KIND

logger = logging.getLogger(__name__)

COUNTEREXAMPLE_A = np.array([[1.0, 1.0], [0.0, 1.0]])
COUNTEREXAMPLE_LAMBDA = 0.3
GOLDEN_TOLERANCE = 1e-8
DIVERGENCE_TOLERANCE = 1e-3
AFFINITY_TOLERANCE = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return dict(name=self.name, passed=bool(self.passed), detail=self.detail)


@dataclass
class VerifyContext:
    options: SolverOptions
    instances: int = 5
    seed: int = 0
    n_jobs: int = 1


def _gaussian_instance(stream, n: int, p: int, k: int, sigma: float = 1.0):
    design_seed, signal_seed, noise_seed = stream.spawn(3)
    A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, n, p, seed=int(design_seed.generate_state(1)[0])))
    x0 = make_signal(SignalSpec(p, k), signal_seed)
    return A, observe(A, x0, NoiseSpec(sigma, noise_seed))


def duplicated_instance(stream, n: int = 8, base: int = 9):
    """
    Gaussian design whose last three columns repeat columns 2, 5 (negated) and 2 again
    """
    design_seed, y_seed = stream.spawn(2)
    A = make_design(DesignSpec(DESIGN_KIND.GAUSSIAN, n, base, seed=int(design_seed.generate_state(1)[0])))
    A = np.column_stack([A, A[:, 2], -A[:, 5], A[:, 2]])
    y = np.random.Generator(np.random.Philox(y_seed)).standard_normal(n)
    lam = 0.2 * float(np.max(np.abs(A.T @ y)))
    return Problem(A, y, lam)


def check_counterexample_solutions(context: VerifyContext) -> CheckResult:
    goldens = {(1.0, 0.0): (0.7, 0.0), (1.0, 0.2): (0.5, 0.2)}
    errors = []
    for y, expected in goldens.items():
        solution = solve(Problem(COUNTEREXAMPLE_A, y, COUNTEREXAMPLE_LAMBDA), context.options)
        errors.append(float(np.max(np.abs(solution.x_hat - np.array(expected)))))
    worst = max(errors)
    return CheckResult('counterexample_solutions', worst <= GOLDEN_TOLERANCE, f'max error {worst:.2e}')


def check_counterexample_dof(context: VerifyContext) -> CheckResult:
    found = []
    for y in ((1.0, 0.0), (1.0, 0.2)):
        problem = Problem(COUNTEREXAMPLE_A, y, COUNTEREXAMPLE_LAMBDA)
        solution = solve(problem, context.options)
        found.append(dof_estimate(reduce(problem, solution, context.options.kkt_tolerance,
                                         context.options.support_tolerance)))
    return CheckResult('counterexample_dof', found == [1, 2], f'dof {found}, expected [1, 2]')


def check_counterexample_membership(context: VerifyContext) -> CheckResult:
    outside = in_G_lambda(Problem(COUNTEREXAMPLE_A, (1.0, 0.0), COUNTEREXAMPLE_LAMBDA))
    inside = in_G_lambda(Problem(COUNTEREXAMPLE_A, (1.0, 0.2), COUNTEREXAMPLE_LAMBDA))
    witness = outside.witness.describe() if outside.witness is not None else 'none'
    passed = (not outside.member and witness == 'I={1}, j=2, S=(+1)' and inside.member)
    return CheckResult('counterexample_membership', passed,
                       f'y=e1 witness {witness}, z1 in G_lambda: {inside.member}')


def check_identity_sure(context: VerifyContext) -> CheckResult:
    problem = Problem(np.eye(2), (3.0, -1.0), 1.0)
    solution = solve(problem, context.options)
    reduced = reduce(problem, solution, context.options.kkt_tolerance, context.options.support_tolerance)
    value = sure(problem, reduced, 1.0)
    error = max(float(np.max(np.abs(reduced.x_star - np.array([2.0, 0.0])))), abs(value - 2.0))
    return CheckResult('identity_sure', error <= GOLDEN_TOLERANCE, f'SURE {value:.10f}, expected 2')


def check_divergence(context: VerifyContext) -> CheckResult:
    """
    finite differences agree with |I*| on all but at most one Gaussian 20 x 40 instance
    """
    agreements = 0
    worst = 0.0
    for stream in spawn_streams(context.seed, context.instances):
        A, y = _gaussian_instance(stream, 20, 40, 5)
        problem = Problem(A, y, 1.0)
        reduced = reduce(problem, solve(problem, context.options), context.options.kkt_tolerance,
                         context.options.support_tolerance)
        report = divergence_fd_report(problem, options=context.options, n_jobs=context.n_jobs, reduced=reduced)
        gap = abs(report.value - dof_estimate(reduced))
        worst = max(worst, gap)
        agreements += gap <= DIVERGENCE_TOLERANCE
    required = max(context.instances - 1, 1)
    return CheckResult('divergence_matches_dof', agreements >= required,
                       f'{agreements}/{context.instances} agree, worst gap {worst:.2e}')


def check_min_support(context: VerifyContext) -> CheckResult:
    """
    reduce reaches the smallest support, one resample allowed for draws on a hyperplane
    """
    mismatches = []
    for index, stream in enumerate(spawn_streams(context.seed + 1, context.instances)):
        first, second = stream.spawn(2)
        for attempt, seed in enumerate((first, second)):
            problem = duplicated_instance(seed)
            solution = solve(problem, context.options)
            reduced = reduce(problem, solution, context.options.kkt_tolerance, context.options.support_tolerance)
            expected = brute_force_min_support(problem, solution)
            if dof_estimate(reduced) == expected:
                break
            if attempt == 0 and not in_G_lambda(problem):
                logger.warning('instance %d is not generic, resampling', index)
                continue
            mismatches.append(index)
            break
    return CheckResult('min_support_matches_brute_force', not mismatches,
                       f'mismatching instances {mismatches}' if mismatches else
                       f'{context.instances} instances agree')


def check_local_affinity(context: VerifyContext) -> CheckResult:
    worst = 0.0
    for stream in spawn_streams(context.seed + 2, context.instances):
        A, y = _gaussian_instance(stream, 20, 40, 5)
        problem = Problem(A, y, 1.0)
        reduced = reduce(problem, solve(problem, context.options), context.options.kkt_tolerance,
                         context.options.support_tolerance)
        worst = max(worst, local_affinity_check(problem, reduced, 1e-3, 20, seed=context.seed,
                                                options=context.options))
    return CheckResult('local_affinity', worst < AFFINITY_TOLERANCE, f'max deviation {worst:.2e}')


# Dictionary mapping check names to the functions running them, in execution order
check_mapping = {
    'counterexample_solutions': check_counterexample_solutions,
    'counterexample_dof': check_counterexample_dof,
    'counterexample_membership': check_counterexample_membership,
    'identity_sure': check_identity_sure,
    'divergence_matches_dof': check_divergence,
    'min_support_matches_brute_force': check_min_support,
    'local_affinity': check_local_affinity,
}


def run_checks(options: Optional[SolverOptions] = None, instances: int = 5, seed: int = 0,
               n_jobs: int = 1, names: Optional[List[str]] = None) -> List[CheckResult]:
    """
    run the verification suite; a check that raises is reported as failed with the error message

    Parameters:
    - options (SolverOptions, optional): solver settings shared by every check.
    - instances (int): random instances per oracle check.
    - seed (int): base seed of the random instances.
    - n_jobs (int): workers for the finite-difference solves.
    - names (list, optional): subset of check names, all checks by default.

    Returns:
    - list of CheckResult in execution order.
    """
    context = VerifyContext(options if options is not None else SolverOptions(), instances, seed, n_jobs)
    selected = names if names is not None else list(check_mapping)
    results = []
    for name in selected:
        check: Callable[[VerifyContext], CheckResult] = check_mapping[name]
        try:
            result = check(context)
        except Exception as error:
            logger.debug('check %s raised', name, exc_info=True)
            result = CheckResult(name, False, f'{type(error).__name__}: {error}')
        logger.info('check %s: %s (%s)', name, 'pass' if result.passed else 'FAIL', result.detail)
        results.append(result)
    return results
