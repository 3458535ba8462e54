"""Symmetric forms: spectral splitting, Morse indices, isotropic subspaces,
and the exact formula for how the negative eigenspace shrinks under
restriction to a subspace."""

import numpy as np

from sfkit import (
    Subspace,
    SymmetricForm,
    b_orthocomplement,
    inertia,
    is_isotropic,
    isotropic_bounds,
    negative_space_relative_dimension,
    restrict_form,
    spectral_split,
)

# a degenerate indefinite form: eigenvalues (2, 1, -1, 0)
rng = np.random.default_rng(5)
q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
a = q @ np.diag([2.0, 1.0, -1.0, 0.0]) @ q.T
form = SymmetricForm(0.5 * (a + a.T))

nm, nz, npos = inertia(form)
print(f"inertia of the form: n_minus={nm}, nullity={nz}, n_plus={npos}")
split = spectral_split(form)
print(f"splitting dims: V- {split.v_minus.dim}, V+ {split.v_plus.dim}, "
      f"ker {split.kernel.dim}; band {split.band:.2e}, "
      f"spectral margin {split.min_gap:.3f}")

# an isotropic line mixing a positive and a negative direction
b_plus = split.v_plus.basis[:, 1]
b_minus = split.v_minus.basis[:, 0]
weight = np.sqrt(form.value(b_plus) / -form.value(b_minus))
z = Subspace.span_of(b_plus + weight * b_minus)
print(f"\nisotropic test line: is_isotropic = {is_isotropic(form, z, 1e-8)}")
dim_z, bound_minus, bound_plus, overlap = isotropic_bounds(form, z)
print(f"isotropic bounds: dim Z = {dim_z} <= n_minus + overlap = "
      f"{bound_minus}+{overlap} and <= n_plus + overlap = {bound_plus}+{overlap}")

# restriction to a random half-dimensional subspace
v = Subspace.from_spanning(rng.standard_normal((4, 2)), 4)
restricted = restrict_form(form, v)
print(f"\nrestricted inertia: {inertia(restricted)}")
vb = b_orthocomplement(form, v)
print(f"B-orthogonal complement of V has dim {vb.dim} "
      f"(= codim V + dim(ker cap V))")

direct, formula = negative_space_relative_dimension(form, v)
print(f"negative-eigenspace relative dimension: direct={direct}, "
      f"formula={formula}  (identical by construction of the calculus)")
