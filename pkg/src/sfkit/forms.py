"""Symmetric bilinear forms and their integer index data.

A form is a symmetric matrix A, optionally paired with a positive-definite
Gram matrix M; index counts are then read from the pencil (A, M), i.e. from
the spectrum of the operator M^{-1} A.  Degenerate forms are fully supported;
no regularization is applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    cholesky_spd,
    eig_pencil,
    inertia_counts,
    kernel_basis,
    min_band_gap,
    orthonormal_basis,
    two_norm,
)
from .subspaces import Subspace, relative_dimension, subspace_intersection

__all__ = [
    "SymmetricForm",
    "SpectralSplit",
    "spectral_split",
    "inertia",
    "morse_index",
    "morse_coindex",
    "nullity",
    "restrict_form",
    "b_orthocomplement",
    "is_isotropic",
    "isotropic_bounds",
    "negative_space_relative_dimension",
]


class SymmetricForm:
    """Bounded symmetric form B(x, y) = x^T A y on R^N, with an optional
    Gram matrix turning index counts into pencil counts."""

    __slots__ = ("_matrix", "_gram", "_eig")

    def __init__(self, matrix, gram=None):
        a = as_matrix(matrix, "form matrix")
        if a.shape[0] != a.shape[1]:
            raise InputError("form matrix must be square")
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        if a.size and np.max(np.abs(a - a.T)) > 1e-10 * scale:
            raise InputError("form matrix must be symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "_matrix", a)
        if gram is not None:
            g = as_matrix(gram, "gram")
            if g.shape != a.shape:
                raise InputError("gram must match the form matrix shape")
            cholesky_spd(g)  # positive definiteness gate
            g = 0.5 * (g + g.T)
            g.setflags(write=False)
        else:
            g = None
        object.__setattr__(self, "_gram", g)
        object.__setattr__(self, "_eig", None)

    def __setattr__(self, *_):
        raise AttributeError("SymmetricForm is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def gram(self):
        return self._gram

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def value(self, x, y=None) -> float:
        y = x if y is None else y
        return float(np.asarray(x) @ self._matrix @ np.asarray(y))

    def pencil_eig(self, tol: Tolerance | None = None):
        """Cached eigendecomposition of the pencil (A, gram)."""
        if self._eig is None:
            object.__setattr__(self, "_eig", eig_pencil(self._matrix, self._gram, tol))
        return self._eig

    def operator_kernel(self, tol: Tolerance | None = None) -> Subspace:
        """Kernel of the represented operator; coincides with the kernel of
        the form matrix regardless of the Gram matrix."""
        return Subspace(kernel_basis(self._matrix, tol), self.dim)

    def __repr__(self):
        tag = ", pencil" if self._gram is not None else ""
        return f"SymmetricForm(dim={self.dim}{tag})"


@dataclass(frozen=True)
class SpectralSplit:
    """Splitting R^N = V_minus + V_plus + kernel induced by a form: the form
    is negative definite on V_minus, positive definite on V_plus, and the
    three pieces are mutually Gram-orthogonal."""

    v_minus: Subspace
    v_plus: Subspace
    kernel: Subspace
    eigenvalues: np.ndarray
    band: float
    min_gap: float


def spectral_split(form: SymmetricForm, tol: Tolerance | None = None) -> SpectralSplit:
    tol = tol or DEFAULT_TOL
    w, x = form.pencil_eig(tol)
    if w.size == 0:
        empty = Subspace.zero(0)
        return SpectralSplit(empty, empty, empty, w, 0.0, float("inf"))
    rho = float(np.max(np.abs(w)))
    band = tol.zero_band(rho)
    neg = w < -band
    pos = w > band
    ker = ~(neg | pos)

    def span(mask):
        cols = x[:, mask]
        return Subspace(orthonormal_basis(cols, tol), form.dim)

    return SpectralSplit(span(neg), span(pos), span(ker), w, band,
                         min_band_gap(w, tol))


def inertia(form: SymmetricForm, tol: Tolerance | None = None):
    """(n_minus, n_zero, n_plus) of the pencil spectrum."""
    w, _ = form.pencil_eig(tol)
    return inertia_counts(w, tol)


def morse_index(form: SymmetricForm, tol: Tolerance | None = None) -> int:
    """Number of pencil eigenvalues below the zero band."""
    return inertia(form, tol)[0]


def nullity(form: SymmetricForm, tol: Tolerance | None = None) -> int:
    return inertia(form, tol)[1]


def morse_coindex(form: SymmetricForm, tol: Tolerance | None = None) -> int:
    return inertia(form, tol)[2]


def restrict_form(form: SymmetricForm, v: Subspace) -> SymmetricForm:
    """Compression Q^T A Q (and Q^T M Q) onto the subspace's basis."""
    if v.ambient_dim != form.dim:
        raise InputError(
            f"subspace lives in R^{v.ambient_dim}, form in R^{form.dim}")
    q = v.basis
    a = q.T @ form.matrix @ q
    g = None if form.gram is None else q.T @ form.gram @ q
    return SymmetricForm(0.5 * (a + a.T), g)


def b_orthocomplement(form: SymmetricForm, v: Subspace,
                      tol: Tolerance | None = None) -> Subspace:
    """All x with B(x, v) = 0 for every v in V: the kernel of Q^T A."""
    if v.ambient_dim != form.dim:
        raise InputError("ambient dimension mismatch")
    if v.dim == 0:
        return Subspace.full(form.dim)
    return Subspace(kernel_basis(v.basis.T @ form.matrix, tol), form.dim)


def is_isotropic(form: SymmetricForm, z: Subspace, tol: float = 1e-9) -> bool:
    """True iff the compression of the form to Z vanishes at tolerance."""
    if z.ambient_dim != form.dim:
        raise InputError("ambient dimension mismatch")
    if z.dim == 0:
        return True
    compressed = z.basis.T @ form.matrix @ z.basis
    return two_norm(compressed) <= tol * max(two_norm(form.matrix), 1e-300)


def isotropic_bounds(form: SymmetricForm, z: Subspace,
                     tol: Tolerance | None = None):
    """For an isotropic Z: (dim Z, n_minus, n_plus, dim(Z cap ker T)); the
    dimension of Z is bounded by each index plus the kernel overlap."""
    tol = tol or DEFAULT_TOL
    if not is_isotropic(form, z, tol.rel_zero):
        raise InputError("subspace is not isotropic for the form")
    n_minus, _, n_plus = inertia(form, tol)
    ker = form.operator_kernel(tol)
    overlap = subspace_intersection(z, ker, tol).dim
    return z.dim, n_minus, n_plus, overlap


def negative_space_relative_dimension(form: SymmetricForm, v: Subspace,
                                      tol: Tolerance | None = None):
    """Relative dimension of the negative eigenspace of the form against the
    negative eigenspace of its restriction to V, computed two ways:

    direct  -- both negative eigenspaces embedded in R^N and compared as
               subspaces;
    formula -- n_minus of the restriction to the B-orthogonal complement of
               V, plus dim(V cap V^{perp_B}), minus dim(V cap ker T).

    The two integers agree identically.
    """
    tol = tol or DEFAULT_TOL
    if v.ambient_dim != form.dim:
        raise InputError("ambient dimension mismatch")
    split = spectral_split(form, tol)

    restricted = restrict_form(form, v)
    w, x = restricted.pencil_eig(tol)
    if w.size:
        band = tol.zero_band(float(np.max(np.abs(w))))
        neg_local = x[:, w < -band]
    else:
        neg_local = np.zeros((v.dim, 0))
    embedded = Subspace(orthonormal_basis(v.basis @ neg_local, tol), form.dim)
    direct = relative_dimension(split.v_minus, embedded, tol)

    vb = b_orthocomplement(form, v, tol)
    n2 = morse_index(restrict_form(form, vb), tol)
    cap_vb = subspace_intersection(v, vb, tol).dim
    cap_ker = subspace_intersection(v, form.operator_kernel(tol), tol).dim
    formula = n2 + cap_vb - cap_ker
    return direct, formula
