"""Subspace calculus on the Grassmannian of R^N.

Every invariant below is an exact integer (or a closed-form real) computed
from rank decisions at the default tolerance; the point of the library is
that the classical identities relating them hold on the nose.
"""

import numpy as np

from sfkit import (
    Subspace,
    fredholm_pair_index,
    gap_distance,
    kato_gamma,
    orthocomplement,
    projection_restriction_index,
    relative_dimension,
    subspace_intersection,
    subspace_sum,
)

rng = np.random.default_rng(1)
n = 8

v = Subspace.from_spanning(rng.standard_normal((n, 5)), n)
w = Subspace.from_spanning(rng.standard_normal((n, 4)), n)

print(f"ambient R^{n}:  dim V = {v.dim},  dim W = {w.dim}")
print(f"dim(V cap W)        = {subspace_intersection(v, w).dim}")
print(f"dim(V + W)          = {subspace_sum(v, w).dim}")

ind = fredholm_pair_index(v, w)
print(f"\npair index ind(V, W) = dim(V cap W) - codim(V + W) = {ind}")
print(f"  computed instead from the compressed projection:   "
      f"{projection_restriction_index(v, w)}")
print(f"  symmetry ind(W, V)                 = {fredholm_pair_index(w, v)}")
print(f"  complements ind(V^perp, W^perp)    = "
      f"{fredholm_pair_index(orthocomplement(v), orthocomplement(w))}")

print(f"\nrelative dimension dim(V, W) = {relative_dimension(v, w)} "
      f"(= dim V - dim W in finite dimension)")
print(f"  as a pair index against W^perp: "
      f"{fredholm_pair_index(v, orthocomplement(w))}")

theta = np.pi / 6
tilted = Subspace.span_of(np.array([np.cos(theta), np.sin(theta)] + [0.0] * (n - 2)))
axis = Subspace.span_of(np.eye(n)[:, 0])
print(f"\nline tilted by pi/6 against a coordinate axis:")
print(f"  gap distance  = {gap_distance(axis, tilted):.6f}  (sin theta = {np.sin(theta):.6f})")
print(f"  Kato constant = {kato_gamma(axis, tilted):.6f}")
