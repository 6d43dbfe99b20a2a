"""
Dense linear-algebra helpers used by the solver, the support reduction and the dof estimators.

Every routine takes an explicit relative tolerance; the default keeps singular values above
1e-10 times the largest one.
"""
# built-in imports
from dataclasses import dataclass

# third-party imports
import numpy as np
from scipy import linalg

# custom imports
from .constants import RANK_TOLERANCE, KERNEL_RESIDUAL_TOLERANCE
from .errors import DimensionMismatch, FullRank, RankDeficient


@dataclass(frozen=True)
class RankInfo:
    rank: int
    singular_values: np.ndarray
    tolerance_used: float


def as_matrix(M) -> np.ndarray:
    """
    return M as a 2-d float array, a 1-d input becomes a single column

    raise DimensionMismatch on non finite entries
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, np.newaxis]
    if M.ndim != 2:
        raise DimensionMismatch(f'expected a matrix, got an array with {M.ndim} dimensions')
    if not np.all(np.isfinite(M)):
        raise DimensionMismatch('matrix has non finite entries')
    return M


def numerical_rank(M, tol: float = RANK_TOLERANCE) -> RankInfo:
    """
    count the singular values larger than tol * max singular value

    Parameters:
    - M (array-like): matrix, may have zero columns.
    - tol (float): relative tolerance, must be positive.

    Returns:
    - RankInfo: rank, singular values in nonincreasing order and the absolute threshold used.
    """
    if tol <= 0:
        raise ValueError('rank tolerance must be positive')
    M = as_matrix(M)
    if M.size == 0:
        return RankInfo(0, np.zeros(0), tol)

    singular_values = linalg.svdvals(M)
    largest = singular_values[0]
    tolerance_used = tol * largest if largest > 0 else tol
    rank = int(np.count_nonzero(singular_values > tolerance_used))
    return RankInfo(rank, singular_values, tolerance_used)


def pseudo_inverse(M, tol: float = RANK_TOLERANCE) -> np.ndarray:
    """
    Moore-Penrose pseudo-inverse (M^T M)^-1 M^T of a full column rank matrix

    computed from an economic QR factorization, M^T M is never formed.
    raise RankDeficient if the numerical rank is lower than the number of columns
    """
    M = as_matrix(M)
    rows, cols = M.shape
    if cols == 0:
        return np.zeros((0, rows))

    info = numerical_rank(M, tol)
    if info.rank < cols:
        raise RankDeficient(f'matrix with {cols} columns has numerical rank {info.rank}')

    q, r = linalg.qr(M, mode='economic')
    return linalg.solve_triangular(r, q.T)


def projector(M, tol: float = RANK_TOLERANCE) -> np.ndarray:
    """
    orthogonal projector onto the column span of M, M may be rank deficient
    """
    M = as_matrix(M)
    rows = M.shape[0]
    if M.shape[1] == 0:
        return np.zeros((rows, rows))

    u, singular_values, _ = linalg.svd(M, full_matrices=False)
    largest = singular_values[0] if singular_values.size else 0.0
    rank = int(np.count_nonzero(singular_values > tol * largest)) if largest > 0 else 0
    basis = u[:, :rank]
    return basis @ basis.T


def complement_projector(M, tol: float = RANK_TOLERANCE) -> np.ndarray:
    M = as_matrix(M)
    return np.eye(M.shape[0]) - projector(M, tol)


def kernel_vector(M, tol: float = RANK_TOLERANCE) -> np.ndarray:
    """
    unit vector h with M h = 0

    h is the right singular vector of the smallest singular value, its first non negligible entry
    is made positive so the choice is reproducible.
    raise FullRank if M has no kernel at the tolerance
    """
    M = as_matrix(M)
    cols = M.shape[1]
    info = numerical_rank(M, tol)
    if info.rank >= cols:
        raise FullRank(f'matrix with {cols} columns has full column rank')

    _, _, vt = linalg.svd(M, full_matrices=True)
    h = vt[-1].copy()
    h /= np.linalg.norm(h)

    # sign convention
    leading = np.flatnonzero(np.abs(h) > 1e-12)
    if leading.size and h[leading[0]] < 0:
        h = -h

    residual = np.linalg.norm(M @ h)
    scale = max(1.0, info.singular_values[0]) if info.singular_values.size else 1.0
    if residual > KERNEL_RESIDUAL_TOLERANCE * scale:
        raise FullRank(f'kernel vector residual {residual:.3e} above tolerance')
    return h


def gram_solve(M, g, tol: float = RANK_TOLERANCE) -> np.ndarray:
    """
    minimum-norm solution of (M^T M) delta = g, M may be rank deficient
    """
    M = as_matrix(M)
    g = np.asarray(g, dtype=float)
    if M.shape[1] == 0:
        return np.zeros(0)
    _, singular_values, vt = linalg.svd(M, full_matrices=False)
    largest = singular_values[0]
    if largest == 0:
        return np.zeros(M.shape[1])
    keep = singular_values > tol * largest
    basis = vt[keep]
    return basis.T @ ((basis @ g) / singular_values[keep] ** 2)
