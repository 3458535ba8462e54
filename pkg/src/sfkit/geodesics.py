"""Closed-geodesic engine.

Input data is a periodic orthonormal frame along a closed geodesic: the
constant frame metric G (diagonal, entries +/-1), the frame connection
coefficient Gamma_t, the curvature term Rbar_t, and optionally a holonomy
matrix S for twisted boundary conditions.  The scaled index-form family

    B_t(V, W) = int_0^1 G(V', W') + t G(Gamma_{tr} V, W') + t G(Gamma_{tr} W, V')
                + t^2 G(Gamma_{tr} V, Gamma_{tr} W) + t^2 G(Rbar_{tr} V, W) dr

is assembled over a real Fourier Galerkin basis of periodic vector fields,
carrying the inner product <V, W> = V(0).W(0) + int V'.W'.  The spectral
flow of t -> B_t is computed from endpoint Morse counts (negative counts at
t=0 minus t=1, endpoint kernels excluded), and the same integer is predicted
by Jacobi-field data: conjugate instants, the Maslov index, the concavity
index and the periodic nullities.  Both routes are exposed so the identity
can be checked exactly.

Maslov convention (fixed by requiring the flow identities to hold exactly on
frames with indefinite G, and agreeing with the classical conjugate-point
count when G = I): with Q the crossing form u(t0)^T G u(t0) on the kernel of
the conjugate-point block,

    i_maslov = -n_minus(G) + sum over interior crossings of signature(Q)
               + n_plus(Q at t = 1, when t = 1 is conjugate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.optimize

from .errors import InputError, NumericalFailure
from .flow import OperatorPath
from .forms import SymmetricForm, morse_index, restrict_form
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    eig_sym,
    inertia_counts,
    kernel_basis,
    orthonormal_basis,
    svd,
)
from .subspaces import Subspace, SymmetryOperator

__all__ = [
    "CoefficientSpec",
    "GeodesicFrameData",
    "GalerkinSpace",
    "JacobiFlow",
    "GeodesicReport",
    "example_frame",
    "assemble_form",
    "metric_symmetry",
    "dirichlet_subspace",
    "operator_path_for_frame",
    "sf_geodesic",
    "sf_dirichlet",
    "jacobi_fundamental",
    "conjugate_instants",
    "maslov_index",
    "maslov_data",
    "concavity_index",
    "jacobi_nullities",
    "verify_periodic_formula",
    "sf_twisted",
]


class CoefficientSpec:
    """Time-periodic matrix coefficient: a constant matrix or a real
    trigonometric polynomial  c0 + sum_k (A_k cos 2 pi k t + B_k sin 2 pi k t)."""

    def __init__(self, c0, terms=()):
        self.c0 = as_matrix(c0, "coefficient")
        self.terms = []
        for k, ak, bk in terms:
            ak = as_matrix(ak, "cos coefficient")
            bk = as_matrix(bk, "sin coefficient")
            if ak.shape != self.c0.shape or bk.shape != self.c0.shape:
                raise InputError("coefficient term shapes differ")
            self.terms.append((int(k), ak, bk))

    @classmethod
    def constant(cls, value) -> "CoefficientSpec":
        return cls(value)

    @classmethod
    def zero(cls, n: int) -> "CoefficientSpec":
        return cls(np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.c0.shape[0]

    @property
    def is_constant(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((k for k, _, _ in self.terms), default=0)

    def __call__(self, t: float) -> np.ndarray:
        out = self.c0.copy()
        for k, ak, bk in self.terms:
            out += ak * np.cos(2 * np.pi * k * t) + bk * np.sin(2 * np.pi * k * t)
        return out

    @classmethod
    def from_json(cls, doc, n: int, name: str) -> "CoefficientSpec":
        if doc is None:
            return cls.zero(n)
        if not isinstance(doc, dict) or "type" not in doc:
            raise InputError(f"{name}: expected an object with a 'type' field")
        kind = doc["type"]
        coeffs = doc.get("coeffs")
        if kind == "const":
            if coeffs is None:
                raise InputError(f"{name}: const spec needs 'coeffs'")
            return cls(coeffs)
        if kind == "fourier":
            if not isinstance(coeffs, dict):
                raise InputError(f"{name}: fourier spec needs coeffs object")
            c0 = coeffs.get("c0", np.zeros((n, n)))
            terms = [(t_["k"], t_.get("cos", np.zeros((n, n))),
                      t_.get("sin", np.zeros((n, n))))
                     for t_ in coeffs.get("terms", [])]
            return cls(c0, terms)
        raise InputError(f"{name}: unknown coefficient type {kind!r}")

    def to_json(self):
        if self.is_constant:
            return {"type": "const", "coeffs": self.c0.tolist()}
        return {"type": "fourier", "coeffs": {
            "c0": self.c0.tolist(),
            "terms": [{"k": k, "cos": a.tolist(), "sin": b.tolist()}
                      for k, a, b in self.terms]}}


_FRAME_CHECK_POINTS = 17


class GeodesicFrameData:
    """Frame data along one period of a closed geodesic.

    Invariants enforced at construction: G is diagonal with +/-1 entries;
    G Rbar_t is symmetric (curvature term of a metric connection);
    G Gamma_t + Gamma_t^T G = 0 (the connection is metric-compatible in the
    frame, which is exactly what makes the first-order system Hamiltonian);
    S^T G S = G when a holonomy S is given.
    """

    def __init__(self, g, gamma: CoefficientSpec | None = None,
                 rbar: CoefficientSpec | None = None, holonomy=None):
        g = np.asarray(g, dtype=float)
        if g.ndim == 1:
            g = np.diag(g)
        g = as_matrix(g, "G")
        n = g.shape[0]
        if g.shape != (n, n) or np.any(g != np.diag(np.diag(g))) \
                or np.any(np.abs(np.diag(g)) != 1.0):
            raise InputError("G must be diagonal with entries +1 or -1")
        self.g = g
        self.n = n
        self.gamma = gamma if gamma is not None else CoefficientSpec.zero(n)
        self.rbar = rbar if rbar is not None else CoefficientSpec.zero(n)
        if self.gamma.n != n or self.rbar.n != n:
            raise InputError("coefficient dimensions must match G")
        for t in np.linspace(0.0, 1.0, _FRAME_CHECK_POINTS):
            gr = g @ self.rbar(t)
            if np.max(np.abs(gr - gr.T)) > 1e-10 * max(1.0, np.max(np.abs(gr))):
                raise InputError("G Rbar_t must be symmetric")
            gam = self.gamma(t)
            skew = g @ gam + gam.T @ g
            if np.max(np.abs(skew)) > 1e-10 * max(1.0, np.max(np.abs(gam))):
                raise InputError("Gamma_t must satisfy G Gamma + Gamma^T G = 0")
        if holonomy is not None:
            s = as_matrix(holonomy, "S")
            if s.shape != (n, n):
                raise InputError("holonomy must be n x n")
            if np.max(np.abs(s.T @ g @ s - g)) > 1e-10 * max(1.0, np.max(np.abs(s)) ** 2):
                raise InputError("holonomy must preserve G (S^T G S = G)")
            self.holonomy = s
        else:
            self.holonomy = None
        self._count_cache = {}

    @property
    def n_minus_g(self) -> int:
        return int(np.sum(np.diag(self.g) < 0))

    def shifted_curvature(self, eps: float) -> "GeodesicFrameData":
        """Frame with Rbar replaced by Rbar + eps I; useful for perturbing
        away a degenerate crossing before recomputing the Maslov count."""
        shifted = CoefficientSpec(self.rbar.c0 + eps * np.eye(self.n),
                                  [(k, a.copy(), b.copy())
                                   for k, a, b in self.rbar.terms])
        return GeodesicFrameData(self.g, self.gamma, shifted, self.holonomy)

    def to_json(self, modes=None):
        doc = {"n": self.n, "G": np.diag(self.g).tolist(),
               "Gamma": self.gamma.to_json(), "Rbar": self.rbar.to_json()}
        if self.holonomy is not None:
            doc["S"] = self.holonomy.tolist()
        if modes is not None:
            doc["modes"] = modes
        return doc


def example_frame(name: str, **params) -> GeodesicFrameData:
    """Catalog of analytically specified frames.

    flat_torus(n)        -- G = I_n, Gamma = 0, Rbar = 0
    sphere_equator       -- n = 2, G = I, Rbar = diag(0, -4 pi^2)
    lorentz_product      -- n = 3, G = diag(1, 1, -1), Rbar = diag(0, -4 pi^2, 0)
    constant_curvature   -- params g (diagonal entries), rbar (constant matrix)
    """
    if name == "flat_torus":
        n = int(params.pop("n", 2))
        _reject_extra(params, name)
        return GeodesicFrameData(np.eye(n))
    if name == "sphere_equator":
        _reject_extra(params, name)
        return GeodesicFrameData(np.eye(2),
                                 rbar=CoefficientSpec.constant(
                                     np.diag([0.0, -4 * np.pi ** 2])))
    if name == "lorentz_product":
        _reject_extra(params, name)
        return GeodesicFrameData(np.diag([1.0, 1.0, -1.0]),
                                 rbar=CoefficientSpec.constant(
                                     np.diag([0.0, -4 * np.pi ** 2, 0.0])))
    if name == "constant_curvature":
        g = params.pop("g", None)
        rbar = params.pop("rbar", None)
        _reject_extra(params, name)
        if g is None or rbar is None:
            raise InputError("constant_curvature needs 'g' and 'rbar'")
        return GeodesicFrameData(g, rbar=CoefficientSpec.constant(rbar))
    raise InputError(f"unknown example frame {name!r}")


def _reject_extra(params, name):
    if params:
        raise InputError(f"unexpected parameters for {name}: {sorted(params)}")


class GalerkinSpace:
    """Real Fourier discretization of periodic R^n-valued fields on [0, 1].

    Scalar modes 1, sqrt2 cos(2 pi k t), sqrt2 sin(2 pi k t) for k <= m,
    tensored with R^n; total dimension n (2m + 1).  The Gram matrix encodes
    <V, W> = V(0).W(0) + int V'.W'.
    """

    def __init__(self, n: int, modes: int):
        if n < 1 or modes < 1:
            raise InputError("need n >= 1 and modes >= 1")
        self.n = n
        self.modes = modes
        m = modes
        sdim = 2 * m + 1
        self.scalar_dim = sdim
        self.dim = n * sdim
        deriv = np.zeros(sdim)
        phi0 = np.zeros(sdim)
        phi0[0] = 1.0
        for k in range(1, m + 1):
            deriv[2 * k - 1] = (2 * np.pi * k) ** 2
            deriv[2 * k] = (2 * np.pi * k) ** 2
            phi0[2 * k - 1] = np.sqrt(2.0)
        self.deriv_scalar = np.diag(deriv)
        self.phi0 = phi0
        self.gram_scalar = self.deriv_scalar + np.outer(phi0, phi0)
        self.gram = np.kron(self.gram_scalar, np.eye(n))
        # int phi_i phi_j' (antisymmetric, couples cos/sin pairs)
        c01 = np.zeros((sdim, sdim))
        for k in range(1, m + 1):
            c01[2 * k - 1, 2 * k] = 2 * np.pi * k
            c01[2 * k, 2 * k - 1] = -2 * np.pi * k
        self.phi_dphi_scalar = c01

    def phi_values(self, t: float) -> np.ndarray:
        m = self.modes
        out = np.empty(self.scalar_dim)
        out[0] = 1.0
        ks = np.arange(1, m + 1)
        out[1::2] = np.sqrt(2.0) * np.cos(2 * np.pi * ks * t)
        out[2::2] = np.sqrt(2.0) * np.sin(2 * np.pi * ks * t)
        return out

    def dphi_values(self, t: float) -> np.ndarray:
        m = self.modes
        out = np.empty(self.scalar_dim)
        out[0] = 0.0
        ks = np.arange(1, m + 1)
        out[1::2] = -np.sqrt(2.0) * 2 * np.pi * ks * np.sin(2 * np.pi * ks * t)
        out[2::2] = np.sqrt(2.0) * 2 * np.pi * ks * np.cos(2 * np.pi * ks * t)
        return out

    def field_values(self, t: float) -> np.ndarray:
        """Basis fields evaluated at t, as a (dim x n) matrix of vectors."""
        return np.kron(self.phi_values(t).reshape(-1, 1), np.eye(self.n))

    def field_derivatives(self, t: float) -> np.ndarray:
        return np.kron(self.dphi_values(t).reshape(-1, 1), np.eye(self.n))

    def eval0_matrix(self) -> np.ndarray:
        """Evaluation-at-0 functional as an (n x dim) matrix; its rank is n."""
        return np.kron(self.phi0.reshape(1, -1), np.eye(self.n))


def _gauss_legendre_nodes(total_frequency: int, poly_extra: int = 0):
    order = 10
    panels = max(4, int(np.ceil(1.0 * total_frequency)) + 2 + poly_extra)
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = np.empty(panels * order)
    weights = np.empty(panels * order)
    h = 1.0 / panels
    for p in range(panels):
        a = p * h
        nodes[p * order:(p + 1) * order] = a + 0.5 * h * (x + 1.0)
        weights[p * order:(p + 1) * order] = 0.5 * h * w
    return nodes, weights


def _assemble_quadrature(t, frame, val_fn, der_fn, nodes, weights):
    g = frame.g
    b = None
    for r, w in zip(nodes, weights):
        val = val_fn(r)
        der = der_fn(r)
        gam = frame.gamma(t * r)
        rb = frame.rbar(t * r)
        core = der @ g @ der.T
        if t != 0.0:
            cross = val @ (gam.T @ g) @ der.T
            core = core + t * (cross + cross.T)
            core = core + (t * t) * (val @ (gam.T @ g @ gam + g @ rb) @ val.T)
        b = w * core if b is None else b + w * core
    return 0.5 * (b + b.T)


def assemble_form(t: float, space: GalerkinSpace,
                  frame: GeodesicFrameData) -> SymmetricForm:
    """Galerkin matrix of the scaled index form B_t, with the space's Gram
    matrix attached.  Constant coefficient data is assembled in closed form;
    trigonometric-polynomial data through composite Gauss-Legendre panels
    sized to the integrand's frequency content."""
    if not (-1e-12 <= t <= 1.0 + 1e-12):
        raise InputError("t must lie in [0, 1]")
    t = float(min(max(t, 0.0), 1.0))
    if frame.n != space.n:
        raise InputError("frame and space dimensions differ")
    g = frame.g
    if frame.gamma.is_constant and frame.rbar.is_constant:
        gam = frame.gamma.c0
        rb = frame.rbar.c0
        b = np.kron(space.deriv_scalar, g)
        if t != 0.0:
            ggam = g @ gam
            if np.any(ggam):
                cross = np.kron(space.phi_dphi_scalar, ggam.T)
                b = b + t * (cross + cross.T)
            b = b + (t * t) * np.kron(np.eye(space.scalar_dim),
                                      gam.T @ g @ gam + g @ rb)
        return SymmetricForm(0.5 * (b + b.T), space.gram)
    freq = 2 * space.modes + max(frame.gamma.degree, frame.rbar.degree) + 2
    nodes, weights = _gauss_legendre_nodes(freq)
    b = _assemble_quadrature(t, frame, space.field_values,
                             space.field_derivatives, nodes, weights)
    return SymmetricForm(b, space.gram)


def metric_symmetry(space: GalerkinSpace,
                    frame: GeodesicFrameData) -> SymmetryOperator:
    """Multiplication by G on the Galerkin basis: a symmetry whose pairing
    differs from B_0 by the rank-n evaluation term G V(0).W(0)."""
    if frame.n != space.n:
        raise InputError("frame and space dimensions differ")
    return SymmetryOperator(np.kron(np.eye(space.scalar_dim), frame.g))


def dirichlet_subspace(space: GalerkinSpace,
                       tol: Tolerance | None = None) -> Subspace:
    """Fields vanishing at t = 0: the kernel of the evaluation functional
    (codimension n)."""
    return Subspace(kernel_basis(space.eval0_matrix(), tol), space.dim)


def operator_path_for_frame(frame: GeodesicFrameData, space: GalerkinSpace,
                            num_samples: int = 33) -> OperatorPath:
    """The assembled family t -> B_t as an operator path on [0, 1]."""
    return OperatorPath.from_function(
        lambda t: assemble_form(t, space, frame).matrix,
        (0.0, 1.0), num_samples=num_samples, gram=space.gram)


def _endpoint_inertia(frame, modes, tol, dirichlet):
    """Endpoint inertia counts of the assembled pencil, cached per frame."""
    key = (modes, dirichlet, tol.rel_zero, tol.abs_zero)
    cached = frame._count_cache.get(key)
    if cached is not None:
        return cached
    space = GalerkinSpace(frame.n, modes)
    forms = [assemble_form(0.0, space, frame), assemble_form(1.0, space, frame)]
    if dirichlet:
        v = dirichlet_subspace(space, tol)
        forms = [restrict_form(f, v) for f in forms]
    counts = []
    for f in forms:
        w, _ = f.pencil_eig(tol)
        counts.append(inertia_counts(w, tol))
    frame._count_cache[key] = (counts[0], counts[1])
    return frame._count_cache[key]


def _stable_sf(frame, modes, tol, dirichlet=False):
    """Endpoint flow at `modes` and 2 x `modes`; the integer must agree."""
    a0, b0 = _endpoint_inertia(frame, modes, tol, dirichlet)
    sf_m = a0[0] - b0[0]
    a1, b1 = _endpoint_inertia(frame, 2 * modes, tol, dirichlet)
    sf_2m = a1[0] - b1[0]
    if sf_m != sf_2m:
        raise NumericalFailure(
            f"spectral flow not stabilized between {modes} and {2 * modes} "
            f"modes ({sf_m} vs {sf_2m}); increase the mode count")
    return sf_m, (modes, sf_m, sf_2m), (a0, b0)


def sf_geodesic(frame: GeodesicFrameData, space: GalerkinSpace,
                tol: Tolerance | None = None) -> int:
    """Spectral flow of the periodic family t -> B_t (endpoint Morse counts,
    checked for stability under mode doubling)."""
    tol = tol or DEFAULT_TOL
    sf, _conv, _ = _stable_sf(frame, space.modes, tol, dirichlet=False)
    return sf


def sf_dirichlet(frame: GeodesicFrameData, space: GalerkinSpace,
                 tol: Tolerance | None = None) -> int:
    """Spectral flow of the same family restricted to fields vanishing at 0."""
    tol = tol or DEFAULT_TOL
    sf, _conv, _ = _stable_sf(frame, space.modes, tol, dirichlet=True)
    return sf


@dataclass(frozen=True)
class JacobiFlow:
    """Fundamental solution of the first-order Jacobi system

        v' = G p - Gamma v,     p' = G Rbar v - G Gamma G p,

    with p = G(v' + Gamma v).  The system is linear Hamiltonian for the
    standard symplectic pairing, so the flow is symplectic; the residual of
    that identity at t = 1 is recorded."""

    n: int
    ts: np.ndarray
    _sol: object = field(repr=False)
    symplectic_residual: float = 0.0

    def phi(self, t: float) -> np.ndarray:
        y = self._sol.sol(float(t))
        return y.reshape(2 * self.n, 2 * self.n)

    def v_block(self, t: float) -> np.ndarray:
        """Upper-right block: v(t) of the solution with v(0) = 0, p(0) = p0."""
        return self.phi(t)[: self.n, self.n:]

    def p_block(self, t: float) -> np.ndarray:
        return self.phi(t)[self.n:, self.n:]


def _omega(n: int) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)],
                     [-np.eye(n), np.zeros((n, n))]])


def jacobi_fundamental(frame: GeodesicFrameData, grid=None,
                       rtol: float = 1e-11, atol: float = 1e-11) -> JacobiFlow:
    """Integrate the fundamental solution on [0, 1] with an embedded
    Runge-Kutta pair; enforces the symplectic residual <= 1e-8 and a
    consistency check against a tighter-tolerance rerun."""
    n = frame.n
    grid = np.linspace(0.0, 1.0, 129) if grid is None else np.asarray(grid, dtype=float)
    if grid[0] > 0.0 or grid[-1] < 1.0:
        raise InputError("grid must cover [0, 1]")
    g = frame.g
    eye = np.eye(2 * n)

    def rhs_matrix(t):
        gam = frame.gamma(t)
        rb = frame.rbar(t)
        return np.block([[-gam, g], [g @ rb, -g @ gam @ g]])

    def rhs(t, y):
        return (rhs_matrix(t) @ y.reshape(2 * n, 2 * n)).reshape(-1)

    def integrate(r, a):
        sol = scipy.integrate.solve_ivp(
            rhs, (0.0, 1.0), eye.reshape(-1), method="DOP853",
            rtol=r, atol=a, dense_output=True)
        if not sol.success:
            raise NumericalFailure(f"Jacobi integration failed: {sol.message}")
        return sol

    sol = integrate(rtol, atol)
    phi1 = sol.sol(1.0).reshape(2 * n, 2 * n)
    check = integrate(rtol * 0.1, atol * 0.1)
    phi1_check = check.sol(1.0).reshape(2 * n, 2 * n)
    # both certificates are relative to the flow's magnitude: the symplectic
    # defect involves products of size ||Phi||^2, which for strongly
    # expanding flows sit far above the double-precision floor of 1e-8
    scale = max(1.0, float(np.max(np.abs(phi1))))
    drift = float(np.max(np.abs(phi1 - phi1_check))) / scale
    omega = _omega(n)
    residual = float(np.max(np.abs(phi1.T @ omega @ phi1 - omega))) \
        / max(1.0, scale * scale)
    if residual > 1e-8 or drift > 1e-8:
        raise NumericalFailure(
            f"Jacobi flow not certified (symplectic residual {residual:.2e}, "
            f"step-refinement drift {drift:.2e}); {sol.t.size} steps taken")
    return JacobiFlow(n, grid, check, max(residual, drift))


def conjugate_instants(frame: GeodesicFrameData, flow: JacobiFlow | None = None,
                       grid_points: int = 2048,
                       tol: Tolerance | None = None):
    """Zeros in (0, 1] of det V(t) where V(t) maps initial momenta of
    solutions vanishing at 0 to their value at t.  Sign changes are refined
    by bisection; near-zero dips without a sign change by local
    minimization; multiplicities come from singular values of V(t0)."""
    tol = tol or DEFAULT_TOL
    flow = flow or jacobi_fundamental(frame)
    ts = np.linspace(0.0, 1.0, grid_points + 1)[1:]
    dets = np.array([np.linalg.det(flow.v_block(t)) for t in ts])
    scale_v = max(float(np.max([np.linalg.norm(flow.v_block(t), 2)
                                for t in ts[:: max(1, grid_points // 32)]])), 1e-30)

    def sigma_min(t):
        _, s, _ = svd(flow.v_block(t))
        return float(s[-1]) if s.size else 0.0

    def is_crossing(t):
        _, s, _ = svd(flow.v_block(t))
        band = tol.zero_band(float(s[0])) if s.size and s[0] > 0 else tol.abs_zero
        mult = int(np.sum(s <= band)) if s.size else frame.n
        return mult

    found = []
    for i in range(len(ts) - 1):
        a, b = ts[i], ts[i + 1]
        if dets[i] == 0.0:
            found.append(float(a))
        elif dets[i] * dets[i + 1] < 0.0:
            root = scipy.optimize.brentq(
                lambda t: np.linalg.det(flow.v_block(t)), a, b, xtol=1e-13)
            found.append(float(root))
        elif 0 < i and abs(dets[i]) < abs(dets[i - 1]) \
                and abs(dets[i]) <= abs(dets[i + 1]) \
                and sigma_min(a) < 1e-4 * scale_v:
            res = scipy.optimize.minimize_scalar(
                sigma_min, bounds=(ts[i - 1], b), method="bounded",
                options={"xatol": 1e-13})
            t0 = float(res.x)
            if is_crossing(t0):
                found.append(t0)
    if dets[-1] == 0.0 or is_crossing(1.0):
        found.append(1.0)

    instants = []
    for t0 in sorted(found):
        if instants and abs(t0 - instants[-1][0]) < 5e-9:
            continue
        mult = is_crossing(t0)
        if mult == 0:
            # a sign change must leave a kernel at the root
            raise NumericalFailure(
                f"conjugate instant near t={t0:.6f} is not resolved at the "
                "grid resolution")
        instants.append((float(round(t0, 12)), mult))
    return instants


@dataclass(frozen=True)
class MaslovData:
    index: int
    n_minus_g: int
    crossings: list  # (t0, multiplicity, signature or n_plus at t=1)
    endpoint_conjugate: bool


def _crossing_form(frame, flow, t0, tol):
    """Q(p0) = u(t0)^T G u(t0) on the kernel of V(t0), with u = G p along
    the solution with v(0) = 0 and initial momentum p0."""
    vt = flow.v_block(t0)
    _, s, vr = svd(vt)
    band = tol.zero_band(float(s[0])) if s.size and s[0] > 0 else tol.abs_zero
    kernel = vr[:, s <= band] if s.size else np.eye(frame.n)
    if kernel.shape[1] == 0:
        raise NumericalFailure(f"no kernel at claimed crossing t={t0}")
    pt = flow.p_block(t0) @ kernel
    q = pt.T @ frame.g @ pt
    q = 0.5 * (q + q.T)
    w, _ = eig_sym(q)
    scale = max(float(np.max(np.abs(w))) if w.size else 0.0,
                float(np.max(pt ** 2)), 1.0)
    band_q = tol.zero_band(scale)
    n_minus = int(np.sum(w < -band_q))
    n_plus = int(np.sum(w > band_q))
    if n_minus + n_plus < w.size:
        raise NumericalFailure(
            f"degenerate crossing form at t={t0:.6f}; perturb the curvature "
            "(shifted_curvature) and rerun")
    return n_plus, n_minus


def maslov_data(frame: GeodesicFrameData, flow: JacobiFlow | None = None,
                tol: Tolerance | None = None) -> MaslovData:
    tol = tol or DEFAULT_TOL
    flow = flow or jacobi_fundamental(frame)
    instants = conjugate_instants(frame, flow, tol=tol)
    total = -frame.n_minus_g
    crossings = []
    endpoint = False
    for t0, mult in instants:
        n_plus, n_minus = _crossing_form(frame, flow, t0, tol)
        if n_plus + n_minus != mult:
            raise NumericalFailure(
                f"crossing form rank mismatch at t={t0:.6f}")
        if t0 >= 1.0 - 1e-9:
            endpoint = True
            total += n_plus
            crossings.append((t0, mult, n_plus))
        else:
            total += n_plus - n_minus
            crossings.append((t0, mult, n_plus - n_minus))
    return MaslovData(total, frame.n_minus_g, crossings, endpoint)


def maslov_index(frame: GeodesicFrameData, flow: JacobiFlow | None = None,
                 tol: Tolerance | None = None) -> int:
    return maslov_data(frame, flow, tol).index


def concavity_index(frame: GeodesicFrameData, flow: JacobiFlow | None = None,
                    tol: Tolerance | None = None) -> int:
    """Index of the boundary form on Jacobi fields with equal endpoint
    values: M_ab = g(u_a(1) - u_a(0), v_b(0)); symmetry of M is asserted."""
    tol = tol or DEFAULT_TOL
    flow = flow or jacobi_fundamental(frame)
    n = frame.n
    phi1 = flow.phi(1.0)
    # kernel of (v0, p0) -> v(1) - v(0)
    close_map = (phi1 - np.eye(2 * n))[:n, :]
    basis = kernel_basis(close_map, tol)
    if basis.shape[1] == 0:
        return 0
    v0 = basis[:n, :]
    dp = (phi1 @ basis)[n:, :] - basis[n:, :]
    # g(G dp_a, v_b(0)) collapses to dp_a . v_b(0) since G^2 = I
    m = dp.T @ v0
    scale = max(1.0, float(np.max(np.abs(dp))) * max(float(np.max(np.abs(v0))), 1.0))
    if np.max(np.abs(m - m.T)) > 1e-8 * scale:
        raise NumericalFailure("concavity boundary form is not symmetric")
    m = 0.5 * (m + m.T)
    w, _ = eig_sym(m)
    band = tol.zero_band(max(float(np.max(np.abs(w))) if w.size else 0.0, scale))
    return int(np.sum(w < -band))


def jacobi_nullities(frame: GeodesicFrameData, flow: JacobiFlow | None = None,
                     tol: Tolerance | None = None):
    """(n_per, n0, dim_per_cap_0): dimensions of the periodic Jacobi fields,
    of those vanishing at both endpoints, and of their intersection."""
    tol = tol or DEFAULT_TOL
    flow = flow or jacobi_fundamental(frame)
    n = frame.n
    phi1 = flow.phi(1.0)
    mono = phi1 - np.eye(2 * n)

    def null_dim(mat):
        _, s, _ = svd(mat)
        if s.size == 0:
            return mat.shape[1]
        band = tol.zero_band(max(float(s[0]), 1.0))
        return int(np.sum(s <= band))

    n_per = null_dim(mono)
    n0 = null_dim(flow.v_block(1.0))
    dpc0 = null_dim(mono[:, n:])
    return n_per, n0, dpc0


@dataclass(frozen=True)
class GeodesicReport:
    sf: int
    sf_dirichlet: int
    i_maslov: int
    i_conc: int
    n_per: int
    n0: int
    dim_per_cap_0: int
    n_minus_g: int
    residual_periodic: int
    residual_dirichlet: int
    conjugate_instants: list
    convergence: tuple          # (modes, sf at modes, sf at 2 modes)
    convergence_dirichlet: tuple
    symplectic_residual: float
    galerkin_nullity_b1: int
    warnings: tuple = ()

    @property
    def ok(self) -> bool:
        return self.residual_periodic == 0 and self.residual_dirichlet == 0

    def to_dict(self):
        return {
            "sf": self.sf,
            "sf_dirichlet": self.sf_dirichlet,
            "i_maslov": self.i_maslov,
            "i_conc": self.i_conc,
            "n_per": self.n_per,
            "n0": self.n0,
            "dim_per_cap_0": self.dim_per_cap_0,
            "n_minus_g": self.n_minus_g,
            "residual_periodic": self.residual_periodic,
            "residual_dirichlet": self.residual_dirichlet,
            "conjugate_instants": [[t, m] for t, m in self.conjugate_instants],
            "convergence": list(self.convergence),
            "convergence_dirichlet": list(self.convergence_dirichlet),
            "symplectic_residual": self.symplectic_residual,
            "galerkin_nullity_b1": self.galerkin_nullity_b1,
            "warnings": list(self.warnings),
            "ok": self.ok,
        }


def verify_periodic_formula(frame: GeodesicFrameData, space: GalerkinSpace,
                            tol: Tolerance | None = None) -> GeodesicReport:
    """Compute every invariant of the closed geodesic twice over and report
    the two residuals

        residual_periodic  = sf - (dim_per_cap_0 - i_maslov - i_conc - n_minus_g)
        residual_dirichlet = sf_dirichlet - (n0 - n_minus_g - i_maslov)

    which vanish identically when the discretization resolves the problem.
    """
    tol = tol or DEFAULT_TOL
    sf, conv, (counts0, counts1) = _stable_sf(frame, space.modes, tol)
    sfd, convd, _ = _stable_sf(frame, space.modes, tol, dirichlet=True)
    flow = jacobi_fundamental(frame)
    mdata = maslov_data(frame, flow, tol)
    i_conc = concavity_index(frame, flow, tol)
    n_per, n0, dpc0 = jacobi_nullities(frame, flow, tol)
    n_minus_g = frame.n_minus_g
    residual_periodic = sf - (dpc0 - mdata.index - i_conc - n_minus_g)
    residual_dirichlet = sfd - (n0 - n_minus_g - mdata.index)
    warnings = []
    if counts0[1]:
        warnings.append(f"B_0 endpoint nullity {counts0[1]}")
    if counts1[1]:
        warnings.append(f"B_1 endpoint nullity {counts1[1]}")
    instants = conjugate_instants(frame, flow, tol=tol)
    return GeodesicReport(
        sf=sf, sf_dirichlet=sfd, i_maslov=mdata.index, i_conc=i_conc,
        n_per=n_per, n0=n0, dim_per_cap_0=dpc0, n_minus_g=n_minus_g,
        residual_periodic=residual_periodic,
        residual_dirichlet=residual_dirichlet,
        conjugate_instants=instants,
        convergence=conv, convergence_dirichlet=convd,
        symplectic_residual=flow.symplectic_residual,
        galerkin_nullity_b1=counts1[1],
        warnings=tuple(warnings))


class _TwistedSpace:
    """Change of variables V(t) = W(t) + t (S - I) W(0) mapping periodic
    fields W onto fields with V(1) = S V(0); carries the induced basis
    evaluators and Gram matrix."""

    def __init__(self, space: GalerkinSpace, s: np.ndarray):
        self.space = space
        self.n = space.n
        self.dim = space.dim
        self.shift = s - np.eye(space.n)

    def field_values(self, t: float) -> np.ndarray:
        base = self.space.field_values(t)
        return base + t * np.kron(self.space.phi0.reshape(-1, 1), self.shift.T)

    def field_derivatives(self, t: float) -> np.ndarray:
        base = self.space.field_derivatives(t)
        return base + np.kron(self.space.phi0.reshape(-1, 1), self.shift.T)

    def gram_matrix(self, nodes, weights) -> np.ndarray:
        val0 = self.field_values(0.0)
        g = val0 @ val0.T
        for r, w in zip(nodes, weights):
            der = self.field_derivatives(r)
            g = g + w * (der @ der.T)
        return 0.5 * (g + g.T)


def sf_twisted(frame: GeodesicFrameData, space: GalerkinSpace,
               tol: Tolerance | None = None):
    """Spectral flow of the family on the twisted space {V(1) = S V(0)}.

    Returns (sf_s, n_s, sf) where n_s is the index of the frame metric on
    the image of S - I and sf = sf_s - n_s is the holonomy-corrected flow.
    """
    tol = tol or DEFAULT_TOL
    s = frame.holonomy if frame.holonomy is not None else np.eye(frame.n)

    def counts_at(modes):
        sp = GalerkinSpace(frame.n, modes)
        twisted = _TwistedSpace(sp, s)
        freq = 2 * modes + max(frame.gamma.degree, frame.rbar.degree) + 2
        nodes, weights = _gauss_legendre_nodes(freq, poly_extra=2)
        gram = twisted.gram_matrix(nodes, weights)
        out = []
        for t in (0.0, 1.0):
            b = _assemble_quadrature(t, frame, twisted.field_values,
                                     twisted.field_derivatives, nodes, weights)
            w, _ = SymmetricForm(b, gram).pencil_eig(tol)
            out.append(inertia_counts(w, tol))
        return out[0][0] - out[1][0]

    sf_m = counts_at(space.modes)
    sf_2m = counts_at(2 * space.modes)
    if sf_m != sf_2m:
        raise NumericalFailure(
            f"twisted spectral flow not stabilized ({sf_m} vs {sf_2m}); "
            "increase the mode count")
    image = orthonormal_basis(s - np.eye(frame.n), tol)
    if image.shape[1] == 0:
        n_s = 0
    else:
        n_s = morse_index(SymmetricForm(image.T @ frame.g @ image), tol)
    return sf_m, n_s, sf_m - n_s
