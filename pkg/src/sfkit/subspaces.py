"""Subspace calculus on the Grassmannian of R^N.

A subspace is carried by an orthonormal basis matrix; every integer invariant
(Fredholm-pair index, relative dimension, ...) reduces to rank decisions made
at a shared tolerance.  Path-lifting turns a discretely sampled family of
subspaces into a path of orthogonal matrices via the Kato rotation between
consecutive orthogonal projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalFailure
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    eig_sym,
    kernel_basis,
    orthonormal_basis,
    svd,
)

__all__ = [
    "Subspace",
    "SubspacePath",
    "SymmetryOperator",
    "projection",
    "subspace_sum",
    "subspace_intersection",
    "orthocomplement",
    "fredholm_pair_index",
    "projection_restriction_index",
    "relative_dimension",
    "kato_gamma",
    "gap_distance",
    "graph_projection",
    "lift_path",
    "conjugate_symmetries_to_constant",
]


class Subspace:
    """Linear subspace of R^N held as an N x k matrix with orthonormal
    columns (k may be zero).  Instances are immutable."""

    __slots__ = ("_basis",)

    def __init__(self, basis, ambient_dim: int | None = None):
        b = as_matrix(basis, "basis")
        if ambient_dim is not None and b.shape[0] != ambient_dim:
            raise InputError(
                f"basis has {b.shape[0]} rows, expected ambient dim {ambient_dim}")
        k = b.shape[1]
        if k:
            defect = np.max(np.abs(b.T @ b - np.eye(k)))
            if defect > 1e-10 * max(k, 1):
                raise InputError(
                    f"columns are not orthonormal (defect {defect:.3e}); "
                    "use Subspace.from_spanning for raw spanning sets")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "_basis", b)

    def __setattr__(self, *_):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def from_spanning(cls, columns, ambient_dim: int | None = None,
                      tol: Tolerance | None = None) -> "Subspace":
        cols = as_matrix(columns, "columns")
        if cols.shape[1] == 0 and ambient_dim is not None:
            cols = np.zeros((ambient_dim, 0))
        return cls(orthonormal_basis(cols, tol), ambient_dim)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def span_of(cls, *vectors, tol: Tolerance | None = None) -> "Subspace":
        cols = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        return cls.from_spanning(cols, tol=tol)

    @property
    def basis(self) -> np.ndarray:
        return self._basis

    @property
    def ambient_dim(self) -> int:
        return self._basis.shape[0]

    @property
    def dim(self) -> int:
        return self._basis.shape[1]

    def projection(self) -> np.ndarray:
        return self._basis @ self._basis.T

    def contains(self, vector, tol: Tolerance | None = None) -> bool:
        tol = tol or DEFAULT_TOL
        v = np.asarray(vector, dtype=float)
        scale = float(np.linalg.norm(v))
        if scale == 0.0:
            return True
        resid = np.linalg.norm(v - self._basis @ (self._basis.T @ v))
        return resid <= tol.zero_band(scale)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _same_ambient(v: Subspace, w: Subspace) -> None:
    if v.ambient_dim != w.ambient_dim:
        raise InputError(
            f"ambient dimensions differ: {v.ambient_dim} vs {w.ambient_dim}")


def projection(v: Subspace) -> np.ndarray:
    """Orthogonal projection matrix Q Q^T onto the subspace."""
    return v.projection()


def subspace_sum(v: Subspace, w: Subspace, tol: Tolerance | None = None) -> Subspace:
    _same_ambient(v, w)
    return Subspace.from_spanning(np.hstack([v.basis, w.basis]), v.ambient_dim, tol)


def orthocomplement(v: Subspace, tol: Tolerance | None = None) -> Subspace:
    _same_ambient(v, v)
    if v.dim == 0:
        return Subspace.full(v.ambient_dim)
    return Subspace(kernel_basis(v.projection().T, tol), v.ambient_dim)


def subspace_intersection(v: Subspace, w: Subspace,
                          tol: Tolerance | None = None) -> Subspace:
    """V cap W computed as the complement of (V^perp + W^perp)."""
    _same_ambient(v, w)
    comp = subspace_sum(orthocomplement(v, tol), orthocomplement(w, tol), tol)
    return orthocomplement(comp, tol)


def fredholm_pair_index(v: Subspace, w: Subspace,
                        tol: Tolerance | None = None) -> int:
    """dim(V cap W) - codim(V + W); every pair of subspaces of R^N qualifies."""
    _same_ambient(v, w)
    inter = subspace_intersection(v, w, tol)
    total = subspace_sum(v, w, tol)
    return inter.dim - (v.ambient_dim - total.dim)


def projection_restriction_index(v: Subspace, w: Subspace,
                                 tol: Tolerance | None = None) -> int:
    """Fredholm index of P_{V^perp} restricted to W, computed from the rank
    of the compressed projection; agrees with `fredholm_pair_index`."""
    tol = tol or DEFAULT_TOL
    _same_ambient(v, w)
    vperp = orthocomplement(v, tol)
    m = vperp.basis.T @ w.basis
    if m.size == 0:
        r = 0
    else:
        _, s, _ = svd(m)
        r = int(np.sum(s > tol.zero_band(s[0]))) if s.size and s[0] > 0 else 0
    dim_ker = w.dim - r
    codim_im = vperp.dim - r
    return dim_ker - codim_im


def relative_dimension(v: Subspace, w: Subspace,
                       tol: Tolerance | None = None) -> int:
    """dim(V cap W^perp) - dim(W cap V^perp); in R^N equals dim V - dim W."""
    _same_ambient(v, w)
    a = subspace_intersection(v, orthocomplement(w, tol), tol).dim
    b = subspace_intersection(w, orthocomplement(v, tol), tol).dim
    return a - b


def kato_gamma(v: Subspace, w: Subspace, tol: Tolerance | None = None) -> float:
    """Minimal-gap constant in [0, 1]: the smallest singular value of
    P_{V^perp} restricted to the complement of V cap W inside W.  When the
    restriction acts on nothing (W inside V) the empty infimum is taken to
    be 1, matching the stated range."""
    tol = tol or DEFAULT_TOL
    _same_ambient(v, w)
    inter = subspace_intersection(v, w, tol)
    # complement of V cap W inside W, in W-coordinates
    coeff = kernel_basis(inter.basis.T @ w.basis, tol)
    rest = w.basis @ coeff
    if rest.shape[1] == 0:
        return 1.0
    vperp = orthocomplement(v, tol)
    m = vperp.basis.T @ rest
    if m.size == 0:
        return 0.0
    _, s, _ = svd(m)
    return float(min(s[s.size - 1], 1.0)) if s.size else 0.0


def gap_distance(v: Subspace, w: Subspace) -> float:
    """Operator 2-norm of P_V - P_W (the gap metric on the Grassmannian)."""
    _same_ambient(v, w)
    d = v.projection() - w.projection()
    w_eig, _ = eig_sym(d)
    return float(np.max(np.abs(w_eig))) if w_eig.size else 0.0


def graph_projection(L) -> np.ndarray:
    """Orthogonal projection onto the graph {(x, Lx)} in R^{d0+d1}, by the
    closed formula built from (I + L L^T)^{-1}."""
    L = as_matrix(L, "L")
    d1, d0 = L.shape
    s = np.linalg.solve(np.eye(d1) + L @ L.T, np.eye(d1))
    top_left = np.eye(d0) - L.T @ s @ L
    top_right = L.T @ s
    bottom_right = np.eye(d1) - s
    p = np.block([[top_left, top_right], [top_right.T, bottom_right]])
    return 0.5 * (p + p.T)


@dataclass(frozen=True)
class SubspacePath:
    """Ordered samples (t_i, V_i) of a family of subspaces, with an optional
    interpolation callback used to refine large consecutive gaps."""

    samples: list
    interpolate: object = field(default=None, repr=False)

    def __post_init__(self):
        if not self.samples:
            raise InputError("subspace path needs at least one sample")
        ts = [t for t, _ in self.samples]
        if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
            raise InputError("sample parameters must be strictly increasing")
        dims = {v.ambient_dim for _, v in self.samples}
        if len(dims) != 1:
            raise InputError("all subspaces must share the ambient dimension")

    @property
    def ambient_dim(self) -> int:
        return self.samples[0][1].ambient_dim

    @property
    def domain(self):
        return self.samples[0][0], self.samples[-1][0]

    @classmethod
    def from_function(cls, fn, domain, num: int = 17) -> "SubspacePath":
        a, b = domain
        ts = np.linspace(a, b, num)
        return cls([(float(t), fn(float(t))) for t in ts], interpolate=fn)


class SymmetryOperator:
    """Self-adjoint involution (J = J^T, J^2 = I); equivalently the
    difference P_W - P_{W^perp} for some subspace W."""

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        m = as_matrix(matrix, "symmetry")
        if m.shape[0] != m.shape[1]:
            raise InputError("symmetry must be square")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        if m.size and np.max(np.abs(m - m.T)) > 1e-10 * scale:
            raise InputError("symmetry must be self-adjoint")
        if m.size and np.max(np.abs(m @ m - np.eye(m.shape[0]))) > 1e-9:
            raise InputError("symmetry must square to the identity")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "_matrix", m)

    def __setattr__(self, *_):
        raise AttributeError("SymmetryOperator is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def positive_eigenspace(self, tol: Tolerance | None = None) -> Subspace:
        w, q = eig_sym(self._matrix, tol)
        return Subspace(q[:, w > 0.0], self.dim)


def _kato_rotation(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Orthogonal U with U ran(p0) = ran(p1), defined whenever the projection
    gap is < 1:  U = (P1 P0 + (I-P1)(I-P0)) (I - (P0-P1)^2)^{-1/2}."""
    n = p0.shape[0]
    d = p0 - p1
    w, q = eig_sym(np.eye(n) - d @ d)
    if np.min(w) <= 0.0:
        raise NumericalFailure("projection gap >= 1, Kato rotation undefined")
    inv_sqrt = q @ np.diag(1.0 / np.sqrt(w)) @ q.T
    eye = np.eye(n)
    return (p1 @ p0 + (eye - p1) @ (eye - p0)) @ inv_sqrt


def _chain_rotation(t0, v0, t1, v1, interpolate, budget) -> np.ndarray:
    p0, p1 = v0.projection(), v1.projection()
    gap = gap_distance(v0, v1)
    if gap <= 0.9:
        return _kato_rotation(p0, p1)
    if interpolate is None or budget <= 0:
        raise NumericalFailure(
            f"subspace gap {gap:.3f} on [{t0:g}, {t1:g}] cannot be refined "
            f"({'no interpolation callback' if interpolate is None else 'bisection budget exhausted'})")
    tm = 0.5 * (t0 + t1)
    vm = interpolate(tm)
    left = _chain_rotation(t0, v0, tm, vm, interpolate, budget - 1)
    right = _chain_rotation(tm, vm, t1, v1, interpolate, budget - 1)
    return right @ left


def lift_path(path: SubspacePath, initial=None, *,
              max_bisections: int = 20) -> list:
    """Lift a subspace path to orthogonal matrices Phi_t with
    Phi_{t_0} = initial and Phi_t(W_ref) = V_t where W_ref is the preimage
    of V_{t_0} under `initial` (the identity by default).

    Consecutive samples must have projection gap <= 0.9, possibly after
    refinement through the path's interpolation callback; each original
    interval gets a budget of `max_bisections` bisections.
    """
    n = path.ambient_dim
    if initial is None:
        phi = np.eye(n)
    else:
        phi = as_matrix(initial, "initial")
        if phi.shape != (n, n):
            raise InputError("initial transformation has the wrong shape")
        if np.max(np.abs(phi.T @ phi - np.eye(n))) > 1e-9:
            raise InputError("initial transformation is not orthogonal")
    out = [phi]
    samples = path.samples
    for (t0, v0), (t1, v1) in zip(samples, samples[1:]):
        u = _chain_rotation(t0, v0, t1, v1, path.interpolate, max_bisections)
        phi = u @ phi
        out.append(phi)
    return out


def conjugate_symmetries_to_constant(symmetries: list,
                                     tol: Tolerance | None = None):
    """Given symmetries J_i along a grid, produce orthogonal U_i with
    U_i J_i U_i^T equal to the first symmetry, by lifting the path of their
    positive eigenspaces."""
    if not symmetries:
        raise InputError("need at least one symmetry")
    dims = {s.dim for s in symmetries}
    if len(dims) != 1:
        raise InputError("symmetries must share the dimension")
    spaces = [s.positive_eigenspace(tol) for s in symmetries]
    path = SubspacePath([(float(i), v) for i, v in enumerate(spaces)])
    phis = lift_path(path)
    us = [phi.T for phi in phis]
    return us, symmetries[0]
