"""Seeded random instance builders for property sweeps and the CLI.

Spectra are drawn away from zero (or pinned exactly to zero for engineered
degeneracies) so every integer invariant is decided with a comfortable
margin at the default tolerance.
"""

from __future__ import annotations

import numpy as np

from .flow import OperatorPath
from .forms import SymmetricForm
from .subspaces import Subspace, SubspacePath

__all__ = [
    "random_orthogonal",
    "random_symmetric_with_margin",
    "random_subspace",
    "random_form",
    "random_reduction_instance",
    "random_varying_instance",
    "random_form_subspace_pair",
    "random_path",
    "rotation_family",
]


def random_orthogonal(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_symmetric_with_margin(rng, n: int, zeros: int = 0) -> np.ndarray:
    """Symmetric matrix whose spectrum avoids (-0.2, 0.2) except for exactly
    `zeros` eigenvalues pinned to 0."""
    free = n - zeros
    spec = rng.uniform(0.2, 2.0, free) * rng.choice([-1.0, 1.0], free)
    spec = np.concatenate([spec, np.zeros(zeros)])
    q = random_orthogonal(rng, n)
    a = q @ np.diag(spec) @ q.T
    return 0.5 * (a + a.T)


def random_subspace(rng, n: int, k: int) -> Subspace:
    return Subspace.from_spanning(rng.standard_normal((n, k)), n)


def random_form(rng, n: int, zeros: int = 0, with_gram: bool = False) -> SymmetricForm:
    gram = None
    if with_gram:
        b = rng.standard_normal((n, n))
        gram = b @ b.T + n * np.eye(n)
    return SymmetricForm(random_symmetric_with_margin(rng, n, zeros), gram)


def random_path(rng, n: int, samples: int = 3, zeros_at_ends=(0, 0),
                with_gram: bool = False) -> OperatorPath:
    ts = np.linspace(0.0, 1.0, samples)
    mats = [random_symmetric_with_margin(rng, n, 0) for _ in range(samples)]
    mats[0] = random_symmetric_with_margin(rng, n, zeros_at_ends[0])
    mats[-1] = random_symmetric_with_margin(rng, n, zeros_at_ends[1])
    gram = None
    if with_gram:
        b = rng.standard_normal((n, n))
        gram = b @ b.T + n * np.eye(n)
    return OperatorPath.from_samples(ts, mats, gram)


def random_reduction_instance(rng, dim: int, codim: int,
                              degenerate: bool = False):
    """(path, subspace) pair for the fixed-subspace restriction identity.

    With `degenerate`, both endpoint forms get nontrivial kernels and the
    subspace is steered through part of the left kernel, so the boundary
    correction terms are exercised away from zero.
    """
    if degenerate:
        zeros_a = int(rng.integers(1, max(2, dim // 3) + 1))
        zeros_b = int(rng.integers(1, max(2, dim // 3) + 1))
        path = random_path(rng, dim, samples=3, zeros_at_ends=(zeros_a, zeros_b))
        a = path.mats[0]
        w, q = np.linalg.eigh(a)
        ker_cols = q[:, np.abs(w) < 1e-8]
        target = dim - codim
        take = min(ker_cols.shape[1], max(1, target // 2), target)
        raw = np.hstack([ker_cols[:, :take],
                         rng.standard_normal((dim, target - take))])
        v = Subspace.from_spanning(raw, dim)
    else:
        path = random_path(rng, dim, samples=3)
        v = random_subspace(rng, dim, dim - codim)
    return path, v


def rotation_family(rng, n: int, k: int, planes: int = 2,
                    max_angle: float = 1.2):
    """Smooth family V_t = R(t) V_0, with R(t) a product of plane rotations
    whose angles scale linearly in t.  Returns (subspace_path, callback)."""
    v0 = random_subspace(rng, n, k)
    axes = []
    for _ in range(planes):
        i, j = rng.choice(n, size=2, replace=False)
        axes.append((int(i), int(j), float(rng.uniform(-max_angle, max_angle))))

    def rotation(t: float) -> np.ndarray:
        r = np.eye(n)
        for i, j, rate in axes:
            g = np.eye(n)
            c, s = np.cos(rate * t), np.sin(rate * t)
            g[i, i] = g[j, j] = c
            g[i, j], g[j, i] = -s, s
            r = g @ r
        return r

    def family(t: float) -> Subspace:
        return Subspace(rotation(t) @ v0.basis, n)

    return SubspacePath.from_function(family, (0.0, 1.0), num=17), family


def random_varying_instance(rng, n: int = 8, codim: int = 2):
    """(path, family) pair for the varying-domain identity."""
    path = random_path(rng, n, samples=3)
    family, _ = rotation_family(rng, n, n - codim)
    return path, family


def random_form_subspace_pair(rng, max_dim: int = 12):
    """(form, subspace) pair for the negative-eigenspace comparison; mixes
    in kernels and Gram matrices."""
    n = int(rng.integers(2, max_dim + 1))
    zeros = int(rng.integers(0, 3)) if rng.random() < 0.4 else 0
    zeros = min(zeros, n - 1)
    form = random_form(rng, n, zeros=zeros, with_gram=rng.random() < 0.25)
    k = int(rng.integers(0, n + 1))
    if zeros and rng.random() < 0.5 and k:
        w, q = np.linalg.eigh(form.matrix)
        ker_cols = q[:, np.abs(w) < 1e-8]
        take = min(ker_cols.shape[1], k)
        raw = np.hstack([ker_cols[:, :take], rng.standard_normal((n, k - take))])
        v = Subspace.from_spanning(raw, n)
    else:
        v = random_subspace(rng, n, k)
    return form, v
