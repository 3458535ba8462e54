"""The equator of the round 2-sphere, end to end.

Frame data: fiber dimension 2 (tangent and normal directions), G = I,
curvature term diag(0, -4 pi^2).  Jacobi fields in the normal direction
solve v'' = -4 pi^2 v, so the instants conjugate to 0 are t = 1/2 and t = 1,
the classical picture.  The Galerkin flow of the scaled index-form family
must land on the same integers.
"""

from sfkit import (
    GalerkinSpace,
    conjugate_instants,
    example_frame,
    jacobi_fundamental,
    verify_periodic_formula,
)

frame = example_frame("sphere_equator")
flow = jacobi_fundamental(frame)
print(f"symplectic residual of the Jacobi flow: {flow.symplectic_residual:.2e}")
print("conjugate instants (t, multiplicity):",
      conjugate_instants(frame, flow))

report = verify_periodic_formula(frame, GalerkinSpace(2, 16))
print(f"""
spectral flow (periodic)    sf       = {report.sf}
spectral flow (Dirichlet)   sf_0     = {report.sf_dirichlet}
Maslov index                         = {report.i_maslov}
concavity index                      = {report.i_conc}
nullities (n_per, n0, per cap 0)     = ({report.n_per}, {report.n0}, {report.dim_per_cap_0})
residuals (periodic, Dirichlet)      = ({report.residual_periodic}, {report.residual_dirichlet})
flow stable under mode doubling      : {report.convergence}
Galerkin kernel of B_1 vs n_per      : {report.galerkin_nullity_b1} == {report.n_per}
""")

assert report.ok
print("identity verified: sf = dim(per cap 0) - i_maslov - i_conc - n_minus(g)")
