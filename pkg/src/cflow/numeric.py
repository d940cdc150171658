"""Dense complex matrix arithmetic, LU factorization and the tolerance policy.

All matrices are square ``numpy.ndarray`` values of dtype complex128.  Every
operation is a pure function over immutable inputs; nothing here keeps state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonFiniteEntry, SingularMatrix

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "as_matrix",
    "multiply",
    "max_norm",
    "LUFactorization",
    "lu_factor",
    "solve",
    "inverse",
    "extended_inverse",
    "power_int",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used throughout the package.

    Parameters
    ----------
    rank_tol : float
        Relative threshold for rank / pivot decisions.
    root_tol : float
        Convergence threshold (max step size) for the root finder.
    cluster_tol : float
        Radius used when merging nearby polynomial roots into one eigenvalue.
    residual_tol : float
        Relative residual accepted for matrix equations (annihilating
        relations, inverse checks).
    cond_warn : float
        Condition-estimate level above which a warning is emitted.
    """

    rank_tol: float = 1e-10
    root_tol: float = 1e-12
    cluster_tol: float = 1e-7
    residual_tol: float = 1e-9
    cond_warn: float = 1e12

    def __post_init__(self):
        for name in ("rank_tol", "root_tol", "cluster_tol", "residual_tol", "cond_warn"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a square complex128 array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    m = np.ascontiguousarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise NonFiniteEntry("matrix contains NaN or infinite entries")
    return m


def multiply(a, b) -> np.ndarray:
    """Matrix product with dimension checking."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def max_norm(a) -> float:
    """Maximum entry magnitude; the norm used for every relative comparison."""
    return float(np.max(np.abs(np.asarray(a, dtype=np.complex128))))


@dataclass(frozen=True)
class LUFactorization:
    """Row-pivoted triangular factorization of a square matrix."""

    lu: np.ndarray
    piv: np.ndarray
    n: int
    smallest_pivot: float


def lu_factor(a, tol: ToleranceConfig = DEFAULT_TOL) -> LUFactorization:
    """Factor ``a`` with partial pivoting.

    Raises
    ------
    SingularMatrix
        If the smallest pivot magnitude is at or below
        ``rank_tol * max_norm(a)``.
    """
    a = as_matrix(a)
    with warnings.catch_warnings():
        # scipy warns on exact zero pivots; the pivot check below turns that
        # case into SingularMatrix
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest <= tol.rank_tol * max(max_norm(a), 1e-300):
        raise SingularMatrix(
            f"pivot {smallest:.3e} at or below rank tolerance; matrix is numerically singular"
        )
    return LUFactorization(lu=lu, piv=piv, n=a.shape[0], smallest_pivot=smallest)


def solve(f: LUFactorization, rhs) -> np.ndarray:
    """Solve ``A X = rhs`` given a factorization of ``A``."""
    rhs = np.asarray(rhs, dtype=np.complex128)
    if rhs.shape[0] != f.n:
        raise DimensionMismatch(f"rhs has {rhs.shape[0]} rows, factorization has {f.n}")
    return scipy.linalg.lu_solve((f.lu, f.piv), rhs, check_finite=False)


def inverse(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Inverse formed by solving against the identity."""
    a = as_matrix(a)
    return solve(lu_factor(a, tol), np.eye(a.shape[0], dtype=np.complex128))


def extended_inverse(a) -> np.ndarray:
    """Gauss-Jordan inverse in extended precision (``clongdouble`` result).

    Used where inversion error would otherwise be amplified by heavy
    cancellation downstream (Vandermonde coefficients, negative-power
    chains); matrices stay small, so the cost is negligible.  Callers are
    responsible for singularity checks via :func:`lu_factor`.
    """
    a = np.asarray(a)
    n = a.shape[0]
    work = np.hstack([a.astype(np.clongdouble), np.eye(n, dtype=np.clongdouble)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(work[col:, col])))
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
        work[col] = work[col] / work[col, col]
        for r in range(n):
            if r != col:
                work[r] = work[r] - work[r, col] * work[col]
    return work[:, n:]


def power_int(a, k: int, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Integer matrix power by square-and-multiply; ``k = 0`` gives the identity.

    Negative ``k`` requires an invertible matrix and raises
    :class:`SingularMatrix` otherwise.
    """
    a = as_matrix(a)
    k = int(k)
    if k < 0:
        a = inverse(a, tol)
        k = -k
    result = np.eye(a.shape[0], dtype=np.complex128)
    base = a
    while k > 0:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result
