# built-in imports
import json
from os.path import join, dirname

# third-party imports
import numpy as np
import pandas as pd

# custom imports
from .constants import DATA_PATH, SCHEMA_VERSION
from .errors import DimensionMismatch, InvalidSpec


def data_path(path: DATA_PATH) -> str:
    '''
    absolute path of a file shipped under data/

    param: path DATA_PATH member
    '''
    return join(dirname(dirname(dirname(__file__))), *path.value)


def read_matrix_csv(path: str) -> np.ndarray:
    '''
    read a dense matrix stored as CSV of reals without header
    '''
    try:
        matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
    except pd.errors.EmptyDataError as error:
        raise InvalidSpec(f'{path} is empty') from error
    except ValueError as error:
        raise InvalidSpec(f'{path} is not a numeric CSV: {error}') from error
    if not np.all(np.isfinite(matrix)):
        raise DimensionMismatch(f'{path} contains non finite entries')
    return matrix


def read_vector_csv(path: str) -> np.ndarray:
    '''
    read a vector stored as one CSV column or one CSV row
    '''
    matrix = read_matrix_csv(path)
    if min(matrix.shape) != 1:
        raise DimensionMismatch(f'{path} holds a {matrix.shape[0]}x{matrix.shape[1]} matrix, expected a vector')
    return matrix.ravel()


def write_vector_csv(path: str, vector) -> None:
    pd.DataFrame(np.asarray(vector, dtype=float).reshape(-1, 1)).to_csv(path, header=False, index=False)


def read_json(path: str) -> dict:
    with open(path, encoding='utf-8') as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as error:
            raise InvalidSpec(f'{path} is not valid JSON: {error}') from error


def write_json(path: str, document: dict) -> None:
    '''
    write a JSON document, schema_version is added when missing
    '''
    document = {'schema_version': SCHEMA_VERSION, **document}
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=False)
        handle.write('\n')


def to_jsonable(value):
    # numpy scalars and arrays are not handled by json
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {key: to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    return value
