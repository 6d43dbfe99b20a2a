from enum import Enum


class DESIGN_KIND(Enum):
    # Define Enum class for design matrix families to avoid hardcoded strings in code

    GAUSSIAN = 'gaussian'
    CONVOLUTION = 'convolution'
    PARTIAL_FOURIER = 'partial_fourier'
    EXPLICIT = 'explicit'


class LAMBDA_MODE(Enum):
    # lambdas given as ratios lambda/sigma or as absolute values

    RATIO = 'ratio'
    ABSOLUTE = 'absolute'


class SELECTION_METHOD(Enum):

    GRID = 'grid'
    GOLDEN = 'golden'


class EXIT_CODE(Enum):
    # Define Enum class for the exit-code contract of the command line

    SUCCESS = 0
    VALIDATION = 1
    NUMERICAL = 2
    VERIFICATION = 3


class DATA_PATH(Enum):
    # Define Enum class for data paths to avoid hardcoded in code

    SCHEMA = ['data', 'schema', 'experiment_config.schema.json']
    CONFIG_SMALL_GAUSSIAN = ['data', 'configs', 'small_gaussian.json']
    CONFIG_RELIABILITY_VS_N = ['data', 'configs', 'reliability_vs_n.json']
    CONFIG_CONVOLUTION = ['data', 'configs', 'convolution.json']
    IDENTITY_A = ['data', 'fixtures', 'identity_A.csv']
    IDENTITY_Y = ['data', 'fixtures', 'identity_y.csv']
    COUNTEREXAMPLE_A = ['data', 'fixtures', 'counterexample_A.csv']
    COUNTEREXAMPLE_Y = ['data', 'fixtures', 'counterexample_y.csv']
    COUNTEREXAMPLE_Z1 = ['data', 'fixtures', 'counterexample_z1.csv']


# Define array for the fixed CSV header of the risk curves. Add more columns at the end only
RISK_CURVE_COLUMNS = ['lambda', 'n', 'p', 'mean_sure', 'std_sure', 'mean_se',
                      'r_t', 'r_hat_t', 'bound', 'failures']

SCHEMA_VERSION = '1.0'
JOBS_ENV_VAR = 'LASSODOF_JOBS'

# numerics
RANK_TOLERANCE = 1e-10
KERNEL_RESIDUAL_TOLERANCE = 1e-10

# solver
KKT_TOLERANCE = 1e-9
SUPPORT_RELATIVE_TOLERANCE = 1e-9
SUPPORT_ABSOLUTE_FLOOR = 1e-12
MAX_ITERATIONS = 200_000
KKT_CHECK_EVERY = 10
POWER_ITERATIONS = 30
POWER_TOLERANCE = 1e-10
LIPSCHITZ_SAFETY = 1.05
POLISH_RETRY_ITERATIONS = 500

# designs
BLUR_WIDTH = 2.0
NOISE_SIGMA = 1.0

# support / dof oracles
BRUTE_FORCE_MAX_P = 14
G_LAMBDA_MAX_P = 12
ORACLE_TOLERANCE = 1e-8
EQUICORRELATION_SLACK = 1e-6
MEMBERSHIP_RELATIVE_TOLERANCE = 1e-8
FD_RELATIVE_DELTA = 1e-5

# experiments
REPLICATIONS = 100
FAILURE_QUOTA = 0.01
LAMBDA_RATIO_GRID = (1e-2, 1e1, 40)
GOLDEN_TOLERANCE = 1e-3
GOLDEN_MAX_ITERATIONS = 100
