import numpy as np
import pytest

from sfkit.errors import InputError, NumericalFailure
from sfkit.forms import morse_index, nullity
from sfkit.geodesics import (
    CoefficientSpec,
    GalerkinSpace,
    GeodesicFrameData,
    assemble_form,
    concavity_index,
    conjugate_instants,
    dirichlet_subspace,
    example_frame,
    jacobi_fundamental,
    jacobi_nullities,
    maslov_data,
    maslov_index,
    metric_symmetry,
    operator_path_for_frame,
    sf_dirichlet,
    sf_geodesic,
    sf_twisted,
    verify_periodic_formula,
)
from sfkit.linalg import Tolerance

TWO_PI = 2 * np.pi


def fourier_frame():
    """n = 2 Riemannian frame with genuinely time-dependent coefficients."""
    a = 0.3
    gamma = CoefficientSpec(np.zeros((2, 2)),
                            [(1, np.array([[0.0, a], [-a, 0.0]]),
                              np.zeros((2, 2)))])
    rbar = CoefficientSpec(np.diag([0.0, -1.0]),
                           [(1, np.diag([0.2, 0.1]), np.diag([0.0, 0.4]))])
    return GeodesicFrameData(np.eye(2), gamma=gamma, rbar=rbar)


def test_frame_validation():
    with pytest.raises(InputError):
        GeodesicFrameData(np.diag([1.0, 2.0]))
    with pytest.raises(InputError):
        example_frame("no_such_frame")
    with pytest.raises(InputError):
        # G Rbar must be symmetric
        example_frame("constant_curvature", g=[1.0, -1.0],
                      rbar=[[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(InputError):
        # Gamma must be metric-compatible
        GeodesicFrameData(np.eye(2),
                          gamma=CoefficientSpec(np.diag([1.0, 0.0])))
    with pytest.raises(InputError):
        GeodesicFrameData(np.diag([1.0, -1.0]),
                          holonomy=np.array([[0.0, 1.0], [1.0, 0.0]]))
    frame = example_frame("sphere_equator")
    gr = frame.g @ frame.rbar(0.3)
    assert np.allclose(gr, gr.T)
    assert example_frame("flat_torus", n=3).n == 3


def test_galerkin_gram_is_spd_and_eval_rank():
    space = GalerkinSpace(2, 4)
    w = np.linalg.eigvalsh(space.gram)
    assert np.all(w > 0)
    assert np.linalg.matrix_rank(space.eval0_matrix()) == 2
    assert dirichlet_subspace(space).dim == space.dim - 2


def test_assemble_flat_torus():
    frame = example_frame("flat_torus", n=2)
    space = GalerkinSpace(2, 4)
    b0 = assemble_form(0.0, space, frame)
    for t in (0.3, 0.7, 1.0):
        bt = assemble_form(t, space, frame)
        assert np.allclose(bt.matrix, b0.matrix)
    # constants span the kernel of B_0, dimension n
    assert nullity(b0) == 2
    # B vanishes on the constant block
    assert np.allclose(b0.matrix[:2, :2], 0.0)


def test_assemble_sphere_spot_value():
    frame = example_frame("sphere_equator")
    space = GalerkinSpace(2, 3)
    b1 = assemble_form(1.0, space, frame)
    # constant normal field: B_1(e, e) = integral of G(Rbar e, e) = -4 pi^2
    assert abs(b1.matrix[1, 1] + 4 * np.pi ** 2) <= 1e-10
    with pytest.raises(InputError):
        assemble_form(1.5, space, frame)


def test_assembly_quadrature_matches_closed_form():
    # constant-coefficient frame pushed through the quadrature path must
    # agree with the closed-form Kronecker assembly
    frame_fast = example_frame("lorentz_product")
    zero = np.zeros((3, 3))
    gamma_q = CoefficientSpec(zero, [(1, zero, zero)])  # constant, but not flagged
    rbar_q = CoefficientSpec(frame_fast.rbar.c0, [(1, zero, zero)])
    frame_quad = GeodesicFrameData(frame_fast.g, gamma=gamma_q, rbar=rbar_q)
    space = GalerkinSpace(3, 3)
    for t in (0.0, 0.4, 1.0):
        fast = assemble_form(t, space, frame_fast).matrix
        quad = assemble_form(t, space, frame_quad).matrix
        assert np.max(np.abs(fast - quad)) <= 1e-11 * max(1.0, np.max(np.abs(fast)))


def test_assembly_quadrature_against_trapezoid_oracle():
    frame = fourier_frame()
    m = 2
    space = GalerkinSpace(2, m)
    t = 0.7
    b = assemble_form(t, space, frame).matrix

    # dense trapezoid oracle of the defining integral
    rs = np.linspace(0.0, 1.0, 20001)
    vals = np.stack([space.field_values(r) for r in rs])      # (R, N, n)
    ders = np.stack([space.field_derivatives(r) for r in rs])
    g = frame.g
    integrand = np.empty((rs.size, space.dim, space.dim))
    for k, r in enumerate(rs):
        gam = frame.gamma(t * r)
        rb = frame.rbar(t * r)
        val, der = vals[k], ders[k]
        cross = val @ (gam.T @ g) @ der.T
        integrand[k] = (der @ g @ der.T + t * (cross + cross.T)
                        + t * t * (val @ (gam.T @ g @ gam + g @ rb) @ val.T))
    oracle = np.trapezoid(integrand, rs, axis=0)
    assert np.max(np.abs(b - oracle)) <= 1e-7


def test_metric_symmetry():
    space1 = GalerkinSpace(1, 2)
    j_pos = metric_symmetry(space1, example_frame("flat_torus", n=1))
    assert np.allclose(j_pos.matrix, np.eye(space1.dim))
    frame_neg = GeodesicFrameData(np.array([[-1.0]]))
    j_neg = metric_symmetry(space1, frame_neg)
    assert np.allclose(j_neg.matrix, -np.eye(space1.dim))
    # pairing form of the negative symmetry has full Morse index
    from sfkit.forms import SymmetricForm
    pairing = SymmetricForm(j_neg.matrix.T @ space1.gram, space1.gram)
    assert morse_index(pairing) == space1.dim

    space = GalerkinSpace(2, 2)
    frame = GeodesicFrameData(np.diag([1.0, -1.0]))
    j = metric_symmetry(space, frame)
    # self-adjoint for the Galerkin inner product and an involution
    assert np.allclose(space.gram @ j.matrix, j.matrix.T @ space.gram)
    assert np.allclose(j.matrix @ j.matrix, np.eye(space.dim))
    # pairing differs from B_0 by a rank-n evaluation term
    b0 = assemble_form(0.0, space, frame).matrix
    diff = j.matrix.T @ space.gram - b0
    assert np.linalg.matrix_rank(diff, tol=1e-8) == 2


def test_jacobi_flow_flat():
    frame = example_frame("flat_torus", n=2)
    flow = jacobi_fundamental(frame)
    for t in (0.25, 0.6, 1.0):
        expected = np.block([[np.eye(2), t * frame.g],
                             [np.zeros((2, 2)), np.eye(2)]])
        assert np.max(np.abs(flow.phi(t) - expected)) <= 1e-9
    assert flow.symplectic_residual <= 1e-8


def test_jacobi_flow_sphere_closed_form():
    frame = example_frame("sphere_equator")
    flow = jacobi_fundamental(frame)
    for t in (0.2, 0.5, 0.9):
        phi = flow.phi(t)
        c, s = np.cos(TWO_PI * t), np.sin(TWO_PI * t)
        # tangent block is the flat one
        assert abs(phi[0, 0] - 1.0) <= 1e-9 and abs(phi[0, 2] - t) <= 1e-9
        # normal block solves v'' = -4 pi^2 v
        assert abs(phi[1, 1] - c) <= 1e-9
        assert abs(phi[1, 3] - s / TWO_PI) <= 1e-9
        assert abs(phi[3, 1] + TWO_PI * s) <= 1e-9
        assert abs(phi[3, 3] - c) <= 1e-9


def test_jacobi_flow_symplectic_for_fourier_frame():
    flow = jacobi_fundamental(fourier_frame())
    assert flow.symplectic_residual <= 1e-8


def test_jacobi_flow_absolute_symplectic_bound_on_catalog():
    # for the moderate catalog flows the raw (unscaled) defect also meets
    # the 1e-8 bound at every grid instant
    for name in ("flat_torus", "sphere_equator", "lorentz_product"):
        frame = example_frame(name)
        flow = jacobi_fundamental(frame)
        n = frame.n
        omega = np.block([[np.zeros((n, n)), np.eye(n)],
                          [-np.eye(n), np.zeros((n, n))]])
        for t in np.linspace(0.0, 1.0, 33):
            phi = flow.phi(t)
            assert np.max(np.abs(phi.T @ omega @ phi - omega)) <= 1e-8


def test_conjugate_instants():
    assert conjugate_instants(example_frame("flat_torus", n=2)) == []
    inst = conjugate_instants(example_frame("sphere_equator"))
    assert len(inst) == 2
    (t1, m1), (t2, m2) = inst
    assert abs(t1 - 0.5) <= 1e-9 and m1 == 1
    assert abs(t2 - 1.0) <= 1e-9 and m2 == 1
    inst = conjugate_instants(example_frame("lorentz_product"))
    assert [(round(t, 9), m) for t, m in inst] == [(0.5, 1), (1.0, 1)]


def test_maslov_index_catalog():
    assert maslov_index(example_frame("flat_torus", n=3)) == 0
    assert maslov_index(example_frame("sphere_equator")) == 2
    # indefinite metric: initial-point term enters with weight -n_minus(g),
    # the endpoint contributes its positive inertia; both crossings of the
    # spacelike normal direction are positive
    data = maslov_data(example_frame("lorentz_product"))
    assert data.n_minus_g == 1
    assert [(round(t, 9), m, s) for t, m, s in data.crossings] == \
        [(0.5, 1, 1), (1.0, 1, 1)]
    assert data.index == -1 + 1 + 1 == 1


def test_maslov_index_timelike_oscillator():
    # one timelike fiber direction with oscillatory curvature
    frame = example_frame("constant_curvature", g=[-1.0],
                          rbar=[[-4 * np.pi ** 2]])
    data = maslov_data(frame)
    # interior crossing negative, endpoint crossing contributes n_plus = 0
    assert data.index == -1 - 1 + 0 == -2
    assert jacobi_nullities(frame) == (2, 1, 1)
    assert concavity_index(frame) == 0
    # identity check: sf = dpc0 - i_maslov - i_conc - n_minus(g) = 1+2-0-1
    space = GalerkinSpace(1, 8)
    assert sf_geodesic(frame, space) == 2
    assert sf_dirichlet(frame, space) == 2


def test_degenerate_crossing_guard():
    # an absurdly wide zero band makes every crossing look degenerate
    frame = example_frame("sphere_equator")
    with pytest.raises(NumericalFailure):
        maslov_index(frame, tol=Tolerance(rel_zero=0.9, abs_zero=1e6))


def test_concavity_index_catalog():
    assert concavity_index(example_frame("flat_torus", n=2)) == 0
    assert concavity_index(example_frame("sphere_equator")) == 0
    assert concavity_index(example_frame("lorentz_product")) == 0


def test_concavity_index_nonzero():
    # curvature c = -(2.5 pi)^2: boundary form on equal-endpoint Jacobi
    # fields is negative on the nonconstant direction
    c = -(2.5 * np.pi) ** 2
    frame = example_frame("constant_curvature", g=[1.0, 1.0],
                          rbar=np.diag([0.0, c]))
    assert concavity_index(frame) == 1
    data = maslov_data(frame)
    assert data.index == 2  # crossings at t = 0.4, 0.8
    assert jacobi_nullities(frame) == (1, 0, 0)
    space = GalerkinSpace(2, 8)
    assert sf_geodesic(frame, space) == 0 - 2 - 1 - 0


def test_jacobi_nullities_catalog():
    assert jacobi_nullities(example_frame("flat_torus", n=2)) == (2, 0, 0)
    assert jacobi_nullities(example_frame("flat_torus", n=4)) == (4, 0, 0)
    assert jacobi_nullities(example_frame("sphere_equator")) == (3, 1, 1)
    # periodic Jacobi fields: tangent and time constants plus the two
    # periodic normal solutions
    assert jacobi_nullities(example_frame("lorentz_product")) == (4, 1, 1)


def test_sf_geodesic_catalog():
    assert sf_geodesic(example_frame("flat_torus", n=2), GalerkinSpace(2, 4)) == 0
    assert sf_geodesic(example_frame("sphere_equator"), GalerkinSpace(2, 8)) == -1
    assert sf_geodesic(example_frame("lorentz_product"), GalerkinSpace(3, 8)) == -1


def test_sf_dirichlet_catalog():
    assert sf_dirichlet(example_frame("flat_torus", n=2), GalerkinSpace(2, 4)) == 0
    assert sf_dirichlet(example_frame("sphere_equator"), GalerkinSpace(2, 8)) == -1
    assert sf_dirichlet(example_frame("lorentz_product"), GalerkinSpace(3, 8)) == -1


def test_verify_periodic_formula_flat():
    rep = verify_periodic_formula(example_frame("flat_torus", n=2),
                                  GalerkinSpace(2, 4))
    assert rep.ok
    assert (rep.sf, rep.sf_dirichlet, rep.i_maslov, rep.i_conc) == (0, 0, 0, 0)
    assert (rep.n_per, rep.n0, rep.dim_per_cap_0, rep.n_minus_g) == (2, 0, 0, 0)
    assert rep.galerkin_nullity_b1 == rep.n_per
    assert rep.conjugate_instants == []


def test_verify_periodic_formula_sphere():
    rep = verify_periodic_formula(example_frame("sphere_equator"),
                                  GalerkinSpace(2, 8))
    assert rep.ok
    assert rep.sf == -1 and rep.sf_dirichlet == -1
    assert rep.i_maslov == 2 and rep.i_conc == 0
    assert (rep.n_per, rep.n0, rep.dim_per_cap_0) == (3, 1, 1)
    assert rep.galerkin_nullity_b1 == 3
    assert rep.symplectic_residual <= 1e-8
    assert rep.convergence == (8, -1, -1)


def test_verify_periodic_formula_lorentz():
    rep = verify_periodic_formula(example_frame("lorentz_product"),
                                  GalerkinSpace(3, 8))
    assert rep.ok
    assert rep.sf == -1 and rep.sf_dirichlet == -1
    assert rep.i_maslov == 1 and rep.i_conc == 0
    assert (rep.n_per, rep.n0, rep.dim_per_cap_0, rep.n_minus_g) == (4, 1, 1, 1)
    assert rep.galerkin_nullity_b1 == 4


def test_verify_periodic_formula_fourier_frame():
    rep = verify_periodic_formula(fourier_frame(), GalerkinSpace(2, 6))
    assert rep.ok


def test_operator_path_symmetric_samples():
    frame = example_frame("sphere_equator")
    path = operator_path_for_frame(frame, GalerkinSpace(2, 2), num_samples=5)
    for m in path.mats:
        assert np.max(np.abs(m - m.T)) <= 1e-12 * max(1.0, np.max(np.abs(m)))
    from sfkit.flow import sf_endpoints
    assert sf_endpoints(path).sf == -1


def test_assembled_family_lipschitz_on_samples():
    # finite-difference norm bound of t -> B_t stays moderate relative to
    # the family's own scale (continuity of the assembled path)
    for frame in (example_frame("lorentz_product"), fourier_frame()):
        space = GalerkinSpace(frame.n, 4)
        path = operator_path_for_frame(frame, space, num_samples=17)
        scale = max(np.max(np.abs(m)) for m in path.mats)
        diffs = [np.max(np.abs(b - a)) / (t1 - t0)
                 for (t0, a), (t1, b) in zip(zip(path.ts, path.mats),
                                             list(zip(path.ts, path.mats))[1:])]
        assert max(diffs) <= 20.0 * scale


def test_sf_twisted_identity_holonomy():
    frame = example_frame("sphere_equator")
    space = GalerkinSpace(2, 6)
    sf_s, n_s, sf = sf_twisted(frame, space)
    assert n_s == 0
    assert sf_s == sf == sf_geodesic(frame, space)


def test_sf_twisted_flat_reflection():
    frame = GeodesicFrameData(np.array([[1.0]]), holonomy=np.array([[-1.0]]))
    space = GalerkinSpace(1, 6)
    sf_s, n_s, sf = sf_twisted(frame, space)
    assert (sf_s, n_s, sf) == (0, 0, 0)


def test_sf_twisted_indefinite_image_index():
    frame = GeodesicFrameData(np.diag([1.0, -1.0]),
                              holonomy=np.diag([1.0, -1.0]))
    space = GalerkinSpace(2, 4)
    _sf_s, n_s, _sf = sf_twisted(frame, space)
    # image of S - I is the timelike axis
    assert n_s == 1


def test_sf_twisted_doubled_period_consistency():
    # antiperiodic flow at curvature c plus periodic flow at c equals the
    # periodic flow of the doubled-period data (curvature 4c)
    c = -np.pi ** 2
    anti = GeodesicFrameData(np.array([[1.0]]),
                             rbar=CoefficientSpec.constant([[c]]),
                             holonomy=np.array([[-1.0]]))
    per = GeodesicFrameData(np.array([[1.0]]),
                            rbar=CoefficientSpec.constant([[c]]))
    doubled = GeodesicFrameData(np.array([[1.0]]),
                                rbar=CoefficientSpec.constant([[4 * c]]))
    space = GalerkinSpace(1, 8)
    sf_s, _n_s, _ = sf_twisted(anti, space)
    assert sf_s + sf_geodesic(per, space) == sf_geodesic(doubled, space)


def test_coefficient_spec_json_roundtrip():
    frame = fourier_frame()
    doc = frame.gamma.to_json()
    back = CoefficientSpec.from_json(doc, 2, "Gamma")
    for t in (0.0, 0.37, 0.9):
        assert np.allclose(back(t), frame.gamma(t))
    with pytest.raises(InputError):
        CoefficientSpec.from_json({"type": "mystery"}, 2, "Gamma")
