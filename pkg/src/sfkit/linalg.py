"""Dense, deterministic linear-algebra kernels used by every other module.

All factorizations reduce to cyclic plane rotations (see ``_kernels``), so a
given input always produces bit-identical output.  Rank decisions are made
relative to the largest singular value; eigenvalue "zero" decisions relative
to the spectral radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import InputError, NumericalFailure

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "eig_sym",
    "eigvals_sym",
    "eig_pencil",
    "svd",
    "orthonormal_basis",
    "kernel_basis",
    "rank",
    "two_norm",
    "cholesky_spd",
    "inertia_counts",
]


@dataclass(frozen=True)
class Tolerance:
    """Zero thresholds: a value x is numerically zero relative to a scale s
    iff abs(x) <= abs_zero + rel_zero * s."""

    rel_zero: float = 1e-9
    abs_zero: float = 1e-12

    def __post_init__(self):
        if not (self.rel_zero > 0.0 and self.abs_zero > 0.0):
            raise InputError("tolerances must be strictly positive")

    def zero_band(self, scale: float) -> float:
        return self.abs_zero + self.rel_zero * abs(scale)

    def is_zero(self, value: float, scale: float) -> bool:
        return abs(value) <= self.zero_band(scale)


DEFAULT_TOL = Tolerance()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a float64 2-d array; NaN/Inf are rejected."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def _check_symmetric(A: np.ndarray, tol: Tolerance, name: str) -> None:
    if A.shape[0] != A.shape[1]:
        raise InputError(f"{name} must be square, got shape {A.shape}")
    if A.size == 0:
        return
    scale = max(1.0, float(np.max(np.abs(A))))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > tol.zero_band(scale):
        raise InputError(f"{name} is not symmetric (asymmetry {asym:.3e})")


def _fix_column_signs(Q: np.ndarray) -> np.ndarray:
    # Deterministic sign convention: largest-magnitude entry of each column
    # is positive (ties broken by lowest row index, which argmax provides).
    if Q.size == 0:
        return Q
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0.0] = 1.0
    return Q * signs


def eig_sym(A, tol: Tolerance | None = None):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, Q) with eigenvalues w ascending and Q orthonormal columns
    such that A = Q diag(w) Q^T.
    """
    tol = tol or DEFAULT_TOL
    A = as_matrix(A, "A")
    _check_symmetric(A, tol, "A")
    n = A.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    As = 0.5 * (A + A.T)
    w, Q = _kernels.jacobi_eigh(As, True)
    order = np.argsort(w, kind="stable")
    return w[order], _fix_column_signs(Q[:, order])


def eigvals_sym(A, tol: Tolerance | None = None) -> np.ndarray:
    """Eigenvalues only (ascending) of a symmetric matrix."""
    tol = tol or DEFAULT_TOL
    A = as_matrix(A, "A")
    _check_symmetric(A, tol, "A")
    if A.shape[0] == 0:
        return np.empty(0)
    w, _ = _kernels.jacobi_eigh(0.5 * (A + A.T), False)
    return np.sort(w, kind="stable")


def svd(A):
    """One-sided Jacobi SVD.  Returns (U, s, V) with A = U diag(s) V^T up to
    the numerical rank; s is descending, U has unit columns for s > 0 and
    zero columns beyond the rank, V is orthogonal (n x n)."""
    A = as_matrix(A, "A")
    m, n = A.shape
    if n == 0 or m == 0:
        return np.zeros((m, 0)), np.zeros(min(m, n) if n else 0)[:0], np.eye(n)
    B, V, s = _kernels.jacobi_svd(A)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    B = B[:, order]
    V = V[:, order]
    U = np.zeros_like(B)
    nz = s > 0.0
    U[:, nz] = B[:, nz] / s[nz]
    return U, s, V


def rank(A, tol: Tolerance | None = None) -> int:
    """Numerical rank from singular values, relative to the largest one."""
    tol = tol or DEFAULT_TOL
    A = as_matrix(A, "A")
    if A.size == 0:
        return 0
    _, s, _ = svd(A)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.zero_band(s[0])))


def orthonormal_basis(columns, tol: Tolerance | None = None) -> np.ndarray:
    """Orthonormal basis of the column space of `columns`.

    The rank is decided by singular values scaled by the largest one; a zero
    or empty input yields an empty basis with the same row count.
    """
    tol = tol or DEFAULT_TOL
    A = as_matrix(columns, "columns")
    m, n = A.shape
    if n == 0 or m == 0:
        return np.zeros((m, 0))
    U, s, _ = svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m, 0))
    r = int(np.sum(s > tol.zero_band(s[0])))
    return _fix_column_signs(U[:, :r])


def kernel_basis(A, tol: Tolerance | None = None) -> np.ndarray:
    """Orthonormal basis of the (right) null space {x : A x = 0}."""
    tol = tol or DEFAULT_TOL
    A = as_matrix(A, "A")
    m, n = A.shape
    if n == 0:
        return np.zeros((0, 0))
    if m == 0:
        return np.eye(n)
    _, s, V = svd(A)
    if s[0] == 0.0:
        return np.eye(n)
    r = int(np.sum(s > tol.zero_band(s[0])))
    return _fix_column_signs(V[:, r:])


def two_norm(A) -> float:
    """Spectral norm (largest singular value)."""
    A = as_matrix(A, "A")
    if A.size == 0:
        return 0.0
    _, s, _ = svd(A)
    return float(s[0]) if s.size else 0.0


def cholesky_spd(M, name: str = "gram") -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix."""
    M = as_matrix(M, name)
    _check_symmetric(M, DEFAULT_TOL, name)
    try:
        return np.linalg.cholesky(0.5 * (M + M.T))
    except np.linalg.LinAlgError as exc:
        raise InputError(f"{name} is not positive definite") from exc


def eig_pencil(A, M=None, tol: Tolerance | None = None):
    """Eigendecomposition of the symmetric pencil (A, M) with M positive
    definite: returns (w, X) ascending with A X = M X diag(w) and
    X^T M X = I.  M = None means the identity."""
    tol = tol or DEFAULT_TOL
    A = as_matrix(A, "A")
    if M is None:
        return eig_sym(A, tol)
    L = cholesky_spd(M)
    C = scipy.linalg.solve_triangular(L, A, lower=True)
    C = scipy.linalg.solve_triangular(L, C.T, lower=True).T
    w, Q = eig_sym(0.5 * (C + C.T), tol)
    X = scipy.linalg.solve_triangular(L.T, Q, lower=False)
    return w, X


def inertia_counts(eigenvalues: np.ndarray, tol: Tolerance | None = None,
                   radius: float | None = None):
    """(n_minus, n_zero, n_plus) of a spectrum, with the zero band scaled by
    the spectral radius (or an explicit `radius` override)."""
    tol = tol or DEFAULT_TOL
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0:
        return 0, 0, 0
    rho = float(np.max(np.abs(w))) if radius is None else float(radius)
    band = tol.zero_band(rho)
    n_minus = int(np.sum(w < -band))
    n_plus = int(np.sum(w > band))
    return n_minus, w.size - n_minus - n_plus, n_plus


def min_band_gap(eigenvalues: np.ndarray, tol: Tolerance | None = None) -> float:
    """Smallest distance from any out-of-band eigenvalue to the zero band;
    infinity when every eigenvalue sits inside the band."""
    tol = tol or DEFAULT_TOL
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0:
        return float("inf")
    band = tol.zero_band(float(np.max(np.abs(w))))
    outside = np.abs(w)[np.abs(w) > band]
    if outside.size == 0:
        return float("inf")
    return float(np.min(outside) - band)


def require_contract(condition: bool, message: str) -> None:
    if not condition:
        raise NumericalFailure(message)
