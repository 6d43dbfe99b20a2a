"""
Command line front end.

    python -m lassodof solve --matrix A.csv --observation y.csv --lambda 0.3
    python -m lassodof experiment data/configs/small_gaussian.json --out curves.csv --jobs 4
    python -m lassodof verify

Exit codes: 0 success, 1 usage or validation error, 2 non convergence or failure quota, 3 failed checks.
"""
# built-in imports
import json
import logging
import sys
import warnings
from dataclasses import replace

# third-party imports
import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# custom imports
from .classes.solver import Problem, SolverOptions, solve
from .classes.support import reduce
from .classes.dof import dof_estimate, divergence_fd_report, risk_report
from .classes.experiments import (load_config, run_sweep, write_outputs, select_lambda, risk_curves)
from .classes.verification import run_checks
from .utils import (EXIT_CODE, JOBS_ENV_VAR, SCHEMA_VERSION, SELECTION_METHOD, LassoDofError, InvalidSpec,
                    NotConverged, FailureQuotaExceeded, NonUnimodalWarning, read_matrix_csv, read_vector_csv,
                    write_vector_csv, write_json, to_jsonable)

logger = logging.getLogger(__name__)
console = Console()


class NumericalFailure(click.ClickException):
    exit_code = EXIT_CODE.NUMERICAL.value


class VerificationFailure(click.ClickException):
    exit_code = EXIT_CODE.VERIFICATION.value


def configure_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(message)s', datefmt='[%X]',
                        handlers=[RichHandler(console=Console(stderr=True), show_path=False)], force=True)
    logging.captureWarnings(True)


def solver_options(tol_kkt, tol_support, max_iterations=None, acceleration=False) -> SolverOptions:
    options = SolverOptions(acceleration=acceleration)
    if tol_kkt is not None:
        options.kkt_tolerance = tol_kkt
    if tol_support is not None:
        options.support_tolerance = tol_support
    if max_iterations is not None:
        options.max_iterations = max_iterations
    options.validate()
    return options


def load_problem(matrix_path: str, observation_path: str, lam: float) -> Problem:
    return Problem(read_matrix_csv(matrix_path), read_vector_csv(observation_path), lam)


def emit(document: dict, out, fmt: str, vector=None):
    """
    write a document as JSON (or its vector as CSV) to out, or print the JSON when out is None
    """
    document = to_jsonable(document)
    if out is None:
        click.echo(json.dumps({'schema_version': SCHEMA_VERSION, **document}, indent=2))
    elif fmt == 'csv' and vector is not None:
        write_vector_csv(out, vector)
    else:
        write_json(out, document)


def problem_options(function):
    # options shared by the single instance commands
    function = click.option('--matrix', '-A', 'matrix_path', required=True,
                            type=click.Path(exists=True, dir_okay=False), help='design matrix CSV')(function)
    function = click.option('--observation', '-y', 'observation_path', required=True,
                            type=click.Path(exists=True, dir_okay=False), help='observation vector CSV')(function)
    function = click.option('--tol-kkt', type=float, default=None, help='KKT tolerance of the solver')(function)
    function = click.option('--tol-support', type=float, default=None,
                            help='absolute support threshold, relative detection by default')(function)
    function = click.option('--max-iterations', type=int, default=None)(function)
    function = click.option('--accelerate/--no-accelerate', default=False, help='FISTA with restart')(function)
    function = click.option('--out', type=click.Path(dir_okay=False), default=None)(function)
    function = click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json')(function)
    return function


@click.group()
@click.option('-v', '--verbose', count=True, help='-v for INFO, -vv for DEBUG')
@click.pass_context
def cli(ctx, verbose):
    """Lasso degrees of freedom, SURE and its reliability."""
    configure_logging(verbose)
    ctx.ensure_object(dict)


@cli.command('solve')
@click.option('--lambda', 'lam', type=float, required=True)
@problem_options
def cmd_solve(lam, matrix_path, observation_path, tol_kkt, tol_support, max_iterations, accelerate, out, fmt):
    """Solve one Lasso instance and write the certified solution."""
    try:
        problem = load_problem(matrix_path, observation_path, lam)
        options = solver_options(tol_kkt, tol_support, max_iterations, accelerate)
        solution = solve(problem, options)
    except NotConverged as error:
        raise NumericalFailure(str(error))
    except LassoDofError as error:
        raise click.ClickException(str(error))
    document = {'lambda': lam, 'kkt_tolerance': options.kkt_tolerance, **solution.to_dict()}
    emit(document, out, fmt, vector=solution.x_hat)


@cli.command('dof')
@click.option('--lambda', 'lam', type=float, required=True)
@click.option('--check-fd', is_flag=True, help='cross check with finite differences')
@click.option('--jobs', type=int, default=1, envvar=JOBS_ENV_VAR, show_envvar=True)
@problem_options
def cmd_dof(lam, check_fd, jobs, matrix_path, observation_path, tol_kkt, tol_support, max_iterations,
            accelerate, out, fmt):
    """Reduce the solution to a full column rank support and report |I*|."""
    try:
        problem = load_problem(matrix_path, observation_path, lam)
        options = solver_options(tol_kkt, tol_support, max_iterations, accelerate)
        reduced = reduce(problem, solve(problem, options), options.kkt_tolerance, options.support_tolerance)
        document = {'lambda': lam, 'dof': dof_estimate(reduced), **reduced.to_dict()}
        if check_fd:
            report = divergence_fd_report(problem, options=options, n_jobs=jobs, reduced=reduced)
            document['divergence_fd'] = report.value
            document['fd_support_changes'] = report.support_changes
    except NotConverged as error:
        raise NumericalFailure(str(error))
    except LassoDofError as error:
        raise click.ClickException(str(error))
    emit(document, out, fmt, vector=reduced.x_star)


@cli.command('sure')
@click.option('--lambda', 'lam', type=float, required=True)
@click.option('--sigma', type=float, required=True)
@click.option('--mu', 'mu_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='known mean, adds the squared error')
@problem_options
def cmd_sure(lam, sigma, mu_path, matrix_path, observation_path, tol_kkt, tol_support, max_iterations,
             accelerate, out, fmt):
    """Stein unbiased risk estimate of the Lasso response."""
    try:
        if not sigma > 0:
            raise InvalidSpec(f'sigma must be positive, got {sigma}')
        problem = load_problem(matrix_path, observation_path, lam)
        mu = read_vector_csv(mu_path) if mu_path is not None else None
        options = solver_options(tol_kkt, tol_support, max_iterations, accelerate)
        reduced = reduce(problem, solve(problem, options), options.kkt_tolerance, options.support_tolerance)
        report = risk_report(problem, reduced, sigma, mu)
    except NotConverged as error:
        raise NumericalFailure(str(error))
    except LassoDofError as error:
        raise click.ClickException(str(error))
    emit(report.to_dict(), out, 'json')


@cli.command('experiment')
@click.argument('config_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--seed', type=int, default=None, help='overrides base_seed of the configuration')
@click.option('--jobs', type=int, default=1, envvar=JOBS_ENV_VAR, show_envvar=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='output path, a JSON mirror is written next to the CSV')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv')
def cmd_experiment(config_path, seed, jobs, out, fmt):
    """Run a Monte Carlo experiment and write its risk curves."""
    try:
        config = load_config(config_path)
        if seed is not None:
            config = replace(config, base_seed=seed)
        records = run_sweep(config, n_jobs=jobs)
    except (FailureQuotaExceeded, NotConverged) as error:
        raise NumericalFailure(str(error))
    except LassoDofError as error:
        raise click.ClickException(str(error))

    if out is not None:
        for path in write_outputs(records, out, fmt):
            logger.info('wrote %s', path)
    else:
        click.echo(risk_curves(records).to_csv(index=False, float_format='%.12g'), nl=False)

    table = Table(title='SURE reliability')
    for column in ('n', 'lambda', 'mean SURE - SE', 'R_T', 'R_hat_T', 'bound', 'failures'):
        table.add_column(column, justify='right')
    for record in records:
        for aggregate in record.aggregates:
            table.add_row(str(aggregate.n), f'{aggregate.lam:.4g}',
                          f'{aggregate.mean_sure - aggregate.mean_se:.4g}', f'{aggregate.r_t:.4g}',
                          f'{aggregate.r_hat_t:.4g}', f'{aggregate.bound:.4g}', str(aggregate.failures))
    Console(stderr=True).print(table)


@cli.command('select-lambda')
@click.option('--sigma', type=float, required=True)
@click.option('--method', type=click.Choice([method.value for method in SELECTION_METHOD]), default='grid')
@click.option('--lambdas', default=None, help='comma separated grid of absolute lambdas')
@problem_options
def cmd_select_lambda(sigma, method, lambdas, matrix_path, observation_path, tol_kkt, tol_support,
                      max_iterations, accelerate, out, fmt):
    """Choose lambda by minimizing SURE."""
    try:
        if not sigma > 0:
            raise InvalidSpec(f'sigma must be positive, got {sigma}')
        A, y = read_matrix_csv(matrix_path), read_vector_csv(observation_path)
        grid = None
        if lambdas is not None:
            try:
                grid = [float(value) for value in lambdas.split(',')]
            except ValueError as error:
                raise InvalidSpec(f'cannot parse lambda grid {lambdas!r}') from error
        options = solver_options(tol_kkt, tol_support, max_iterations, accelerate)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', NonUnimodalWarning)
            selection = select_lambda(A, y, sigma, grid, SELECTION_METHOD(method), options=options)
        for warning in caught:
            logger.warning(str(warning.message))
    except NotConverged as error:
        raise NumericalFailure(str(error))
    except LassoDofError as error:
        raise click.ClickException(str(error))
    emit(selection.to_dict(), out, 'json')


@cli.command('verify')
@click.option('--instances', type=int, default=5, show_default=True, help='random instances per oracle check')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--tol-kkt', type=float, default=None)
@click.option('--tol-support', type=float, default=None)
@click.option('--jobs', type=int, default=1, envvar=JOBS_ENV_VAR, show_envvar=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
def cmd_verify(instances, seed, tol_kkt, tol_support, jobs, out):
    """Run the counterexample goldens and the oracle checks."""
    try:
        options = solver_options(tol_kkt, tol_support)
    except LassoDofError as error:
        raise click.ClickException(str(error))
    results = run_checks(options, instances=instances, seed=seed, n_jobs=jobs)

    table = Table(title='verification')
    table.add_column('check', no_wrap=True)
    table.add_column('result')
    table.add_column('detail')
    for result in results:
        table.add_row(result.name, '[green]pass[/green]' if result.passed else '[red]FAIL[/red]', result.detail)
    console.print(table)
    if out is not None:
        write_json(out, dict(checks=[result.to_dict() for result in results]))

    failed = [result.name for result in results if not result.passed]
    if failed:
        raise VerificationFailure('failed checks: ' + ', '.join(failed))


def main(argv=None):
    """
    entry point mapping click usage errors to exit code 1
    """
    try:
        cli.main(args=argv, prog_name='lassodof', standalone_mode=False)
    except click.UsageError as error:
        error.show()
        sys.exit(EXIT_CODE.VALIDATION.value)
    except click.ClickException as error:
        error.show()
        sys.exit(error.exit_code)
    except click.Abort:
        sys.exit(EXIT_CODE.VALIDATION.value)
    sys.exit(EXIT_CODE.SUCCESS.value)
