"""Twisted boundary conditions V(1) = S V(0) for a G-preserving holonomy S.

The twisted space is parametrized through periodic fields by the affine
substitution V(t) = W(t) + t (S - I) W(0); the flow on that space, corrected
by the index of the metric on the image of S - I, extends the periodic
theory to non-periodic frames.  The doubled-period consistency check splits
the periodic fields of a two-fold cover into periodic and antiperiodic parts.
"""

import numpy as np

from sfkit import GalerkinSpace, GeodesicFrameData, example_frame, \
    sf_geodesic, sf_twisted
from sfkit.geodesics import CoefficientSpec

space = GalerkinSpace(2, 8)
frame = example_frame("sphere_equator")
frame_id = GeodesicFrameData(frame.g, rbar=frame.rbar,
                             holonomy=np.eye(2))
sf_s, n_s, sf = sf_twisted(frame_id, space)
print(f"identity holonomy: sf_S = {sf_s}, n_S = {n_s}, sf = {sf} "
      f"(= periodic flow {sf_geodesic(frame, space)})")

refl = GeodesicFrameData(np.diag([1.0, -1.0]), holonomy=np.diag([1.0, -1.0]))
_sf_s, n_s, _sf = sf_twisted(refl, GalerkinSpace(2, 6))
print(f"reflection on a (+,-) metric: n_S = {n_s} "
      f"(image of S - I is the timelike axis)")

# antiperiodic + periodic flows at curvature c assemble to the periodic flow
# of the doubled geodesic (curvature 4c)
c = -np.pi ** 2
space1 = GalerkinSpace(1, 8)
anti = GeodesicFrameData([[1.0]], rbar=CoefficientSpec.constant([[c]]),
                         holonomy=[[-1.0]])
per = GeodesicFrameData([[1.0]], rbar=CoefficientSpec.constant([[c]]))
doubled = GeodesicFrameData([[1.0]], rbar=CoefficientSpec.constant([[4 * c]]))
sf_anti, _, _ = sf_twisted(anti, space1)
lhs = sf_anti + sf_geodesic(per, space1)
rhs = sf_geodesic(doubled, space1)
print(f"doubled-period consistency: {sf_anti} + {sf_geodesic(per, space1)} "
      f"= {lhs} vs {rhs}")
assert lhs == rhs
