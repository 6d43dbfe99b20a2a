from .constants import (DESIGN_KIND, LAMBDA_MODE, SELECTION_METHOD, EXIT_CODE, DATA_PATH,
                        RISK_CURVE_COLUMNS, SCHEMA_VERSION, JOBS_ENV_VAR)
from .errors import (LassoDofError, InvalidSpec, DimensionMismatch, RankDeficient, FullRank,
                     NotConverged, NotOptimalInput, TooLarge, FailureQuotaExceeded, NonUnimodalWarning)
from .numerics import (RankInfo, as_matrix, numerical_rank, pseudo_inverse, projector,
                       complement_projector, kernel_vector, gram_solve)
from .utils import (data_path, read_matrix_csv, read_vector_csv, write_vector_csv, read_json,
                    write_json, to_jsonable)
