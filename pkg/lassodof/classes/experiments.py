"""
Monte Carlo harness for the reliability of SURE on the Lasso.

One experiment fixes a design A and a sparse signal x0, draws K noise realizations y_k = A x0 + eps_k
and, for every lambda of the grid, solves the Lasso, reduces the solution and records SURE, the true
squared error and |I*|. The same K noise streams are reused for every lambda. Aggregates give the
empirical reliability R_T, its plug-in prediction R_hat_T and the bound 6/n + 4 ||mu||^2 / (n^2 sigma^2).
"""
# built-in imports
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Union

# third-party imports
import jsonschema
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

# custom imports
from .designs import DesignSpec, SignalSpec, NoiseSpec, make_design, make_signal, observe, spawn_streams
from .solver import Problem, SolverOptions, solve
from .support import reduce
from .dof import RiskReport, risk_report, sure
from ..utils import (DATA_PATH, LAMBDA_MODE, SELECTION_METHOD, RISK_CURVE_COLUMNS, InvalidSpec,
                     NotConverged, FailureQuotaExceeded, NonUnimodalWarning, data_path, read_json,
                     write_json, to_jsonable)
from ..utils.constants import (NOISE_SIGMA, REPLICATIONS, FAILURE_QUOTA, LAMBDA_RATIO_GRID,
                               GOLDEN_TOLERANCE, GOLDEN_MAX_ITERATIONS)

logger = logging.getLogger(__name__)

PHI_RATIO = 2 / (1 + math.sqrt(5))


@dataclass(frozen=True)
class SweepSpec:
    """
    reliability versus n: one experiment per n with p = ceil(p_over_n n) and k = ceil(fraction p)
    """
    n_values: tuple
    p_over_n: float
    sparsity_fraction: float

    def to_dict(self) -> dict:
        return dict(n_values=list(self.n_values), p_over_n=self.p_over_n,
                    sparsity_fraction=self.sparsity_fraction)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    complete description of one Monte Carlo experiment

    lambdas are absolute values; lambda_values keeps them as written in the configuration
    (ratios lambda/sigma when lambda_mode is ratio).

    ex: config = ExperimentConfig.from_dict(read_json(data_path(DATA_PATH.CONFIG_SMALL_GAUSSIAN)))
    """
    design: DesignSpec
    signal: SignalSpec
    noise: NoiseSpec
    lambdas: tuple
    replications: int = REPLICATIONS
    base_seed: int = 0
    lambda_mode: LAMBDA_MODE = LAMBDA_MODE.RATIO
    lambda_values: tuple = ()
    solver: SolverOptions = field(default_factory=SolverOptions)
    sweep: Optional[SweepSpec] = None
    warm_start: bool = False

    def validate(self):
        if self.replications < 1:
            raise InvalidSpec(f'replications must be at least 1, got {self.replications}')
        if len(self.lambdas) == 0:
            raise InvalidSpec('lambda list is empty')
        if not all(lam > 0 and math.isfinite(lam) for lam in self.lambdas):
            raise InvalidSpec(f'every lambda must be positive, got {list(self.lambdas)}')
        self.design.validate()
        self.signal.validate()
        self.noise.validate()
        if self.signal.p != self.design.p:
            raise InvalidSpec(f'signal length {self.signal.p} differs from p = {self.design.p}')
        self.solver.validate()

    @property
    def sigma(self) -> float:
        return self.noise.sigma

    def at_size(self, n: int) -> 'ExperimentConfig':
        """
        configuration of one point of the sweep
        """
        if self.sweep is None:
            raise InvalidSpec('configuration has no sweep')
        p = int(math.ceil(self.sweep.p_over_n * n - 1e-12))
        config = replace(self, design=self.design.with_size(n, p),
                         signal=SignalSpec.from_fraction(p, self.sweep.sparsity_fraction), sweep=None)
        config.validate()
        return config

    def to_dict(self) -> dict:
        document = dict(design=self.design.to_dict(), signal=dict(sparsity=self.signal.sparsity),
                        noise=dict(sigma=self.noise.sigma), lambdas=list(self.lambda_values),
                        lambda_mode=self.lambda_mode.value, replications=self.replications,
                        base_seed=self.base_seed, solver=self.solver.to_dict(),
                        warm_start=self.warm_start)
        if self.sweep is not None:
            document['sweep'] = self.sweep.to_dict()
        return document

    @classmethod
    def from_dict(cls, document: dict) -> 'ExperimentConfig':
        """
        build a configuration from its JSON document

        Parameters:
        - document (dict): parsed experiment configuration.

        Returns:
        - ExperimentConfig: validated configuration.

        raise InvalidSpec with the schema message when the document does not validate
        """
        validate_document(document)

        sigma = float(document.get('noise', {}).get('sigma', NOISE_SIGMA))
        mode = LAMBDA_MODE(document.get('lambda_mode', LAMBDA_MODE.RATIO.value))
        if 'lambdas' in document:
            values = tuple(float(value) for value in document['lambdas'])
        else:
            start, stop, num = LAMBDA_RATIO_GRID
            grid = document.get('lambda_grid', dict(start=start, stop=stop, num=num))
            values = tuple(np.logspace(math.log10(grid['start']), math.log10(grid['stop']),
                                       int(grid['num'])).tolist())
        lambdas = tuple(value * sigma for value in values) if mode == LAMBDA_MODE.RATIO else values

        sweep = None
        if 'sweep' in document:
            sweep_document = document['sweep']
            sweep = SweepSpec(n_values=tuple(int(n) for n in sweep_document['n_values']),
                              p_over_n=float(sweep_document['p_over_n']),
                              sparsity_fraction=float(sweep_document.get(
                                  'sparsity_fraction', document.get('signal', {}).get('sparsity_fraction', 0.1))))

        design_document = dict(document['design'])
        if sweep is not None:
            n = sweep.n_values[0]
            design_document.setdefault('n', n)
            design_document.setdefault('p', int(math.ceil(sweep.p_over_n * n - 1e-12)))
        elif 'n' not in design_document or 'p' not in design_document:
            raise InvalidSpec('design needs n and p unless a sweep is given')
        design = DesignSpec.from_dict(design_document)

        signal_document = document.get('signal', {})
        if 'sparsity' in signal_document:
            signal = SignalSpec(p=design.p, sparsity=int(signal_document['sparsity']))
        elif 'sparsity_fraction' in signal_document:
            signal = SignalSpec.from_fraction(design.p, float(signal_document['sparsity_fraction']))
        elif sweep is not None:
            signal = SignalSpec.from_fraction(design.p, sweep.sparsity_fraction)
        else:
            raise InvalidSpec('signal needs sparsity or sparsity_fraction')

        config = cls(design=design, signal=signal, noise=NoiseSpec(sigma=sigma), lambdas=lambdas,
                     replications=int(document.get('replications', REPLICATIONS)),
                     base_seed=int(document.get('base_seed', 0)), lambda_mode=mode,
                     lambda_values=values,
                     solver=SolverOptions.from_dict(document.get('solver', {})), sweep=sweep,
                     warm_start=bool(document.get('warm_start', False)))
        config.validate()
        if sweep is not None:
            for n in sweep.n_values:
                config.at_size(n)
        return config


def validate_document(document: dict) -> None:
    schema = read_json(data_path(DATA_PATH.SCHEMA))
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda error: list(error.path))
    if errors:
        error = errors[0]
        location = '/'.join(str(part) for part in error.path) or '<root>'
        raise InvalidSpec(f'invalid experiment configuration at {location}: {error.message}')


def load_config(path: str) -> ExperimentConfig:
    return ExperimentConfig.from_dict(read_json(path))


@dataclass
class LambdaAggregate:
    """
    statistics over the successful replications of one lambda
    """
    lam: float
    n: int
    p: int
    mean_sure: float
    std_sure: float
    mean_se: float
    r_t: float
    r_hat_t: float
    bound: float
    failures: int
    q05_sure: float = float('nan')
    q95_sure: float = float('nan')
    mean_dof: float = float('nan')
    first_sure: float = float('nan')
    std_gap: float = float('nan')
    std_sq_gap: float = float('nan')
    oracle_r_t: float = float('nan')
    replications: int = 0

    def to_row(self) -> dict:
        return {'lambda': self.lam, 'n': self.n, 'p': self.p, 'mean_sure': self.mean_sure,
                'std_sure': self.std_sure, 'mean_se': self.mean_se, 'r_t': self.r_t,
                'r_hat_t': self.r_hat_t, 'bound': self.bound, 'failures': self.failures}

    def to_dict(self) -> dict:
        return to_jsonable(dict(self.__dict__))


@dataclass
class ExperimentRecord:
    config: ExperimentConfig
    mu_norm_sq: float
    reports: List[List[Optional[RiskReport]]]
    aggregates: List[LambdaAggregate]

    @property
    def lambdas(self) -> tuple:
        return self.config.lambdas

    def to_dict(self) -> dict:
        replications = [dict(reports=[None if report is None else report.to_dict() for report in row])
                        for row in self.reports]
        return dict(config=self.config.to_dict(), mu_norm_sq=self.mu_norm_sq,
                    aggregates=[aggregate.to_dict() for aggregate in self.aggregates],
                    replications=replications)


@dataclass
class LambdaSelection:
    lam: float
    sure: float
    method: SELECTION_METHOD
    evaluations: list

    def to_dict(self) -> dict:
        return {'lambda': self.lam, 'sure': self.sure, 'method': self.method.value,
                'evaluations': [{'lambda': lam, 'sure': value} for lam, value in self.evaluations]}


def _check_reports(reports: Sequence[RiskReport]):
    if len(reports) == 0:
        raise InvalidSpec('reliability needs at least one report')
    n, sigma = reports[0].n, reports[0].sigma
    if any(report.n != n or report.sigma != sigma for report in reports):
        raise InvalidSpec('reports do not share n and sigma')
    return n, sigma


def _normalized_gaps(reports: Sequence[RiskReport]) -> np.ndarray:
    n, sigma = _check_reports(reports)
    if any(report.se is None for report in reports):
        raise InvalidSpec('empirical reliability needs the squared error of every report')
    gaps = np.array([report.sure - report.se for report in reports])
    return gaps / (n * sigma ** 2)


def empirical_reliability(reports: Sequence[RiskReport]) -> float:
    """
    R_T = mean of ((SURE - SE) / (n sigma^2))^2
    """
    return float(np.mean(_normalized_gaps(reports) ** 2))


def predicted_reliability(reports: Sequence[RiskReport]) -> float:
    """
    plug-in R_hat_T = -2/n + 4/(n^2 sigma^2) mean ||mu_hat - y||^2 + 4/n^2 mean |I*|
    """
    n, sigma = _check_reports(reports)
    mean_residual = np.mean([report.residual_sq for report in reports])
    mean_dof = np.mean([report.dof for report in reports])
    return float(-2.0 / n + 4.0 / (n ** 2 * sigma ** 2) * mean_residual + 4.0 / n ** 2 * mean_dof)


def oracle_reliability(reports: Sequence[RiskReport]) -> float:
    """
    reliability identity evaluated with the true squared error

    (2 n sigma^4 + 4 sigma^2 mean SE - 4 sigma^4 mean |I*|) / (n sigma^2)^2
    """
    n, sigma = _check_reports(reports)
    mean_se = np.mean([report.se for report in reports])
    mean_dof = np.mean([report.dof for report in reports])
    numerator = 2.0 * n * sigma ** 4 + 4.0 * sigma ** 2 * mean_se - 4.0 * sigma ** 4 * mean_dof
    return float(numerator / (n * sigma ** 2) ** 2)


def reliability_bound(n: int, mu, sigma: float) -> float:
    if not sigma > 0:
        raise InvalidSpec(f'sigma must be positive, got {sigma}')
    mu = np.asarray(mu, dtype=float)
    return float(6.0 / n + 4.0 * float(mu @ mu) / (n ** 2 * sigma ** 2))


def _sample_std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def aggregate(lam: float, reports: Sequence[Optional[RiskReport]], n: int, p: int, sigma: float,
              mu: np.ndarray) -> LambdaAggregate:
    valid = [report for report in reports if report is not None]
    failures = len(reports) - len(valid)
    bound = reliability_bound(n, mu, sigma)
    if not valid:
        nan = float('nan')
        return LambdaAggregate(lam, n, p, nan, nan, nan, nan, nan, bound, failures)

    sure_values = np.array([report.sure for report in valid])
    se_values = np.array([report.se for report in valid])
    squared_gaps = _normalized_gaps(valid) ** 2
    first = reports[0]
    return LambdaAggregate(
        lam=lam, n=n, p=p,
        mean_sure=float(np.mean(sure_values)), std_sure=_sample_std(sure_values),
        mean_se=float(np.mean(se_values)),
        r_t=float(np.mean(squared_gaps)), r_hat_t=predicted_reliability(valid), bound=bound,
        failures=failures,
        q05_sure=float(np.quantile(sure_values, 0.05)), q95_sure=float(np.quantile(sure_values, 0.95)),
        mean_dof=float(np.mean([report.dof for report in valid])),
        first_sure=float('nan') if first is None else float(first.sure),
        std_gap=_sample_std(sure_values - se_values), std_sq_gap=_sample_std(squared_gaps),
        oracle_r_t=oracle_reliability(valid), replications=len(valid))


def _replicate(A: np.ndarray, x0: np.ndarray, mu: np.ndarray, noise: NoiseSpec, lambdas: tuple,
               options: SolverOptions, warm_start: bool = False) -> list:
    """
    all lambdas of one noise realization, None where the solver failed

    lambdas are visited in configuration order; with warm_start each solve starts at the previous
    solution, so reports after the first lambda match a cold start only up to the KKT tolerance
    """
    y = observe(A, x0, noise)
    reports = []
    x_start = None
    with threadpool_limits(limits=1):
        for lam in lambdas:
            problem = Problem(A, y, lam)
            try:
                solution = solve(problem, options, x0=x_start)
            except NotConverged as error:
                logger.warning('replication excluded at lambda = %.4g: %s', lam, error)
                reports.append(None)
                continue
            reduced = reduce(problem, solution, options.kkt_tolerance, options.support_tolerance)
            reports.append(risk_report(problem, reduced, noise.sigma, mu))
            if warm_start:
                x_start = solution.x_hat
    return reports


def run(config: ExperimentConfig, n_jobs: int = 1) -> ExperimentRecord:
    """
    run the K replications of one experiment

    the result only depends on the configuration, not on n_jobs.

    Parameters:
    - config (ExperimentConfig): validated configuration without sweep.
    - n_jobs (int): joblib workers over replications.

    Returns:
    - ExperimentRecord: per replication reports and per lambda aggregates.

    raise FailureQuotaExceeded when more than 1% of the replications fail at some lambda
    """
    if config.sweep is not None:
        raise InvalidSpec('configuration describes a sweep, use run_sweep')
    config.validate()

    A = make_design(config.design)
    signal_root, noise_root = spawn_streams(config.base_seed, 2)
    x0 = make_signal(config.signal, signal_root)
    mu = A @ x0
    mu_norm_sq = float(mu @ mu)
    streams = noise_root.spawn(config.replications)
    logger.info('experiment %s n=%d p=%d k=%d K=%d with %d lambdas', config.design.kind.value,
                config.design.n, config.design.p, config.signal.sparsity, config.replications,
                len(config.lambdas))

    rows = Parallel(n_jobs=n_jobs)(
        delayed(_replicate)(A, x0, mu, NoiseSpec(config.sigma, stream), config.lambdas, config.solver,
                            config.warm_start)
        for stream in streams)

    aggregates = []
    for index, lam in enumerate(config.lambdas):
        reports = [row[index] for row in rows]
        failures = sum(report is None for report in reports)
        if failures > FAILURE_QUOTA * config.replications:
            raise FailureQuotaExceeded(f'{failures} of {config.replications} replications failed at '
                                       f'lambda = {lam:.4g}', failures=failures,
                                       replications=config.replications)
        aggregates.append(aggregate(lam, reports, config.design.n, config.design.p, config.sigma, mu))
    return ExperimentRecord(config=config, mu_norm_sq=mu_norm_sq, reports=rows, aggregates=aggregates)


def run_sweep(config: ExperimentConfig, n_jobs: int = 1) -> List[ExperimentRecord]:
    if config.sweep is None:
        return [run(config, n_jobs)]
    return [run(config.at_size(n), n_jobs) for n in config.sweep.n_values]


def risk_curves(records: Union[ExperimentRecord, Sequence[ExperimentRecord]]) -> pd.DataFrame:
    """
    one row per lambda (and per n for a sweep) with the fixed risk curve columns
    """
    if isinstance(records, ExperimentRecord):
        records = [records]
    rows = [aggregate_.to_row() for record in records for aggregate_ in record.aggregates]
    table = pd.DataFrame(rows, columns=RISK_CURVE_COLUMNS)
    return table.astype({'n': int, 'p': int, 'failures': int})


def decay_slope(table: pd.DataFrame, lam: Optional[float] = None) -> float:
    """
    least squares slope of log R_T against log n

    lam selects the rows of one lambda, it may be omitted when the table holds a single lambda
    """
    if lam is None:
        distinct = np.unique(table['lambda'].to_numpy())
        if distinct.size != 1:
            raise InvalidSpec(f'table holds {distinct.size} lambdas, choose one')
        lam = float(distinct[0])
    rows = table[np.isclose(table['lambda'].to_numpy(), lam, rtol=1e-9, atol=0.0)]
    rows = rows[rows['r_t'] > 0]
    if rows['n'].nunique() < 2:
        raise InvalidSpec('decay slope needs at least two sizes')
    slope, _ = np.polyfit(np.log(rows['n'].to_numpy(dtype=float)), np.log(rows['r_t'].to_numpy()), 1)
    return float(slope)


def write_outputs(records: Union[ExperimentRecord, Sequence[ExperimentRecord]], path: str,
                  fmt: str = 'csv') -> List[str]:
    """
    write the risk curves as CSV plus a JSON mirror with per replication detail

    fmt 'json' writes only the JSON document; returns the written paths
    """
    if isinstance(records, ExperimentRecord):
        records = [records]
    base = path[:-len('.' + fmt)] if path.endswith('.' + fmt) else path
    json_path = base + '.json'
    written = []
    if fmt == 'csv':
        csv_path = base + '.csv'
        risk_curves(records).to_csv(csv_path, index=False, float_format='%.12g')
        written.append(csv_path)
    document = dict(risk_curves=to_jsonable(risk_curves(records).to_dict(orient='records')),
                    experiments=[to_jsonable(record.to_dict()) for record in records])
    write_json(json_path, document)
    written.append(json_path)
    return written


def _sure_at(A, y, lam: float, sigma: float, options: SolverOptions) -> float:
    problem = Problem(A, y, lam)
    solution = solve(problem, options)
    reduced = reduce(problem, solution, options.kkt_tolerance, options.support_tolerance)
    return sure(problem, reduced, sigma)


def select_lambda(A, y, sigma: float, lambdas: Optional[Sequence[float]] = None,
                  method: SELECTION_METHOD = SELECTION_METHOD.GRID, bracket: Optional[tuple] = None,
                  options: Optional[SolverOptions] = None, tol: float = GOLDEN_TOLERANCE,
                  max_iterations: int = GOLDEN_MAX_ITERATIONS) -> LambdaSelection:
    """
    lambda minimizing SURE, on a grid or by golden section search on log lambda

    Parameters:
    - A (np.ndarray): design.
    - y (np.ndarray): observation.
    - sigma (float): noise level.
    - lambdas (sequence, optional): grid; default grid is sigma times 40 log-spaced ratios in [1e-2, 1e1].
    - method (SELECTION_METHOD): GRID or GOLDEN.
    - bracket (tuple, optional): golden search interval, the grid extent by default.
    - options (SolverOptions, optional): solver settings.
    - tol (float): golden search stops when the log lambda interval is shorter than tol.

    Returns:
    - LambdaSelection: chosen lambda, its SURE and every evaluated pair.
    """
    options = options if options is not None else SolverOptions()
    if lambdas is None:
        start, stop, num = LAMBDA_RATIO_GRID
        lambdas = sigma * np.logspace(math.log10(start), math.log10(stop), num)
    lambdas = [float(lam) for lam in lambdas]
    if len(lambdas) == 0 or not all(lam > 0 for lam in lambdas):
        raise InvalidSpec('lambda grid must be nonempty and positive')

    evaluations = []

    def evaluate(lam):
        value = _sure_at(A, y, lam, sigma, options)
        evaluations.append((lam, value))
        return value

    if method == SELECTION_METHOD.GRID:
        values = [evaluate(lam) for lam in lambdas]
        best = int(np.argmin(values))
        return LambdaSelection(lambdas[best], values[best], method, evaluations)

    low, high = bracket if bracket is not None else (min(lambdas), max(lambdas))
    if not 0 < low < high:
        raise InvalidSpec(f'golden section needs 0 < low < high, got ({low}, {high})')
    lower, upper = math.log(low), math.log(high)
    f_lower, f_upper = evaluate(low), evaluate(high)
    x1 = upper - PHI_RATIO * (upper - lower)
    x2 = lower + PHI_RATIO * (upper - lower)
    f1, f2 = evaluate(math.exp(x1)), evaluate(math.exp(x2))
    iteration = 0
    while iteration < max_iterations and upper - lower > tol:
        if f2 > f1:
            upper, x2, f2 = x2, x1, f1
            x1 = upper - PHI_RATIO * (upper - lower)
            f1 = evaluate(math.exp(x1))
        else:
            lower, x1, f1 = x1, x2, f2
            x2 = lower + PHI_RATIO * (upper - lower)
            f2 = evaluate(math.exp(x2))
        iteration += 1

    lam, value = (math.exp(x1), f1) if f1 <= f2 else (math.exp(x2), f2)
    if f_lower < value or f_upper < value:
        warnings.warn(f'golden section reached the boundary of [{low:.4g}, {high:.4g}], '
                      'SURE is not unimodal on the bracket', NonUnimodalWarning)
        lam, value = (low, f_lower) if f_lower <= f_upper else (high, f_upper)
        logger.warning('golden section returned the bracket end lambda = %.4g', lam)
    return LambdaSelection(lam, value, method, evaluations)
