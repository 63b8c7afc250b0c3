"""Dense vectors, matrices and the step size alpha(v)

Vectors and matrices are plain float64 numpy arrays, validated once on entry
(as_vector / as_matrix) and marked read-only. Reductions used by the solvers
(dot, norm2, matvec) sum sequentially in index order so that traces are
bit-reproducible.
"""

import logging
import math
from typing import Any

import numpy as np

from rkl.engine.exceptions import (
    DimensionMismatch,
    NonFiniteEntries,
    SingularDirection,
    ZeroResidual,
)

logger = logging.getLogger(__name__)

#: Norms below this are treated as exact zero
ZERO_THRESHOLD = 1e-300

#: Default tolerance for the symmetric / skew-symmetric predicates
STRUCTURE_TOL = 1e-12


def as_vector(values: Any, name: str = "v") -> np.ndarray:
    """Validate and freeze a length-n vector"""
    if np.ndim(values) > 1:
        raise DimensionMismatch(f"as_vector({name})", "1-D", np.shape(values))
    v = np.array(values, dtype=np.float64).reshape(-1)
    if v.size < 1:
        raise DimensionMismatch(f"as_vector({name})", "n >= 1", v.shape)
    if not np.all(np.isfinite(v)):
        raise NonFiniteEntries(name)
    v.flags.writeable = False
    return v


def as_matrix(values: Any, name: str = "A") -> np.ndarray:
    """Validate and freeze a square matrix"""
    A = np.array(values, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"as_matrix({name})", "(n, n)", A.shape)
    if not np.all(np.isfinite(A)):
        raise NonFiniteEntries(name)
    A.flags.writeable = False
    return A


def _check_same_length(op: str, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionMismatch(op, x.shape, y.shape)


def dot(x: np.ndarray, y: np.ndarray) -> float:
    """<x, y> summed left to right"""
    _check_same_length("dot", x, y)
    total = 0.0
    for a, b in zip(x.tolist(), y.tolist()):
        total += a * b
    return total


def norm2(x: np.ndarray) -> float:
    """Euclidean norm with scaling, so tiny vectors keep a representable norm"""
    values = x.tolist()
    scale = max((abs(a) for a in values), default=0.0)
    if scale == 0.0:
        return 0.0
    total = 0.0
    for a in values:
        t = a / scale
        total += t * t
    return scale * math.sqrt(total)


def matvec(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    """A x with each row reduced by dot()"""
    if A.shape[1] != x.shape[0]:
        raise DimensionMismatch("matvec", (A.shape[0], x.shape[0]), A.shape)
    return np.array([dot(row, x) for row in A], dtype=np.float64)


def axpy(a: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """a x + y"""
    _check_same_length("axpy", x, y)
    return a * x + y


def residual_update(r: np.ndarray, alpha_k: float, Ar: np.ndarray) -> np.ndarray:
    """r - alpha_k A r"""
    return axpy(-alpha_k, Ar, r)


def projection_coefficient(x: np.ndarray, y: np.ndarray) -> float:
    """<x, y> / <y, y> evaluated on x / ||x|| and y / ||y||

    Both inner products underflow once the entries drop below ~1e-154, so
    the quotient is formed from unit vectors and rescaled by ||x|| / ||y||.
    The caller guarantees ||y|| >= ZERO_THRESHOLD.
    """
    nx = norm2(x)
    if nx == 0.0:
        return 0.0
    ny = norm2(y)
    xh = x / nx
    yh = y / ny
    return (nx / ny) * (dot(xh, yh) / dot(yh, yh))


def alpha(A: np.ndarray, v: np.ndarray) -> float:
    """alpha(v) = <v, Av> / <Av, Av>, invariant under v -> c v

    Raises:
        ZeroResidual: ||v|| is zero
        SingularDirection: ||Av|| is zero
    """
    nv = norm2(v)
    if nv < ZERO_THRESHOLD:
        raise ZeroResidual(nv)
    Av = matvec(A, v)
    if norm2(Av) < ZERO_THRESHOLD:
        raise SingularDirection(nv)
    return projection_coefficient(v, Av)


def phi_map(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Phi(v) = (I - alpha(v) A) v, the GMRES(1) residual map"""
    a = alpha(A, v)
    return residual_update(v, a, matvec(A, v))


def symmetric_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def skew_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A - A.T)


def is_symmetric(A: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    """Entrywise |A - A^T| <= tol * max(1, max|A|)"""
    return asymmetry(A) <= tol * max(1.0, float(np.max(np.abs(A))))


def is_skew_symmetric(M: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    """Entrywise |M + M^T| <= tol * max(1, max|M|)"""
    return skew_asymmetry(M) <= tol * max(1.0, float(np.max(np.abs(M))))


def asymmetry(A: np.ndarray) -> float:
    return float(np.max(np.abs(A - A.T)))


def skew_asymmetry(M: np.ndarray) -> float:
    return float(np.max(np.abs(M + M.T)))


def iteration_matrix(A: np.ndarray) -> np.ndarray:
    """M = I - A"""
    return as_matrix(np.eye(A.shape[0]) - A, name="M")
