"""Spectral flow of paths of symmetric forms, by two independent methods,
plus the restriction-formula verifiers for fixed and varying subspaces.

Sign convention, used consistently everywhere: the flow of a path on [a, b]
is the relative dimension of the negative eigenspaces at the endpoints,

    sf = n_minus(B_a) - n_minus(B_b),

with endpoint eigenvalues inside the zero band counted as kernel, never as
negative.  The partition method counts band-rank differences over an
adaptively chosen partition and must reproduce the same integer.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalFailure
from .forms import SymmetricForm, morse_index, restrict_form, spectral_split
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    cholesky_spd,
    inertia_counts,
    min_band_gap,
    orthonormal_basis,
    svd,
)
from .subspaces import Subspace, SubspacePath, lift_path, relative_dimension

__all__ = [
    "OperatorPath",
    "FlowReport",
    "ReductionReport",
    "VaryingReductionReport",
    "PartitionControl",
    "sf_endpoints",
    "sf_partition",
    "sf_restricted",
    "sf_varying",
    "verify_reduction",
    "verify_reduction_varying",
    "cogredient_transform",
    "eigenvalue_trace",
]


class OperatorPath:
    """Continuous path t -> SymmetricForm on [a, b].

    Backed either by samples with entrywise-linear interpolation of the form
    matrix, or by a callable; the Gram matrix (inner product) is shared by
    the whole path.
    """

    def __init__(self, ts, mats, gram=None, func=None):
        ts = np.asarray(ts, dtype=float)
        if ts.size < 2:
            raise InputError("a path needs at least two samples")
        if np.any(np.diff(ts) <= 0):
            raise InputError("sample times must be strictly increasing")
        mats = [as_matrix(m, "path sample") for m in mats]
        shape = mats[0].shape
        if any(m.shape != shape for m in mats):
            raise InputError("all samples must share one dimension")
        if shape[0] != shape[1]:
            raise InputError("path samples must be square")
        self.ts = ts
        self.mats = mats
        self.gram = None if gram is None else as_matrix(gram, "gram")
        self._func = func
        self._cache = {}

    @classmethod
    def from_samples(cls, ts, mats, gram=None) -> "OperatorPath":
        return cls(ts, mats, gram)

    @classmethod
    def from_function(cls, func, domain, num_samples: int = 33,
                      gram=None) -> "OperatorPath":
        a, b = float(domain[0]), float(domain[1])
        ts = np.linspace(a, b, num_samples)
        mats = [as_matrix(func(t), "path sample") for t in ts]
        return cls(ts, mats, gram, func=func)

    @classmethod
    def linear(cls, start, end, domain=(0.0, 1.0), gram=None) -> "OperatorPath":
        a = as_matrix(start, "start")
        b = as_matrix(end, "end")
        return cls.from_function(
            lambda t: a + (t - domain[0]) / (domain[1] - domain[0]) * (b - a),
            domain, num_samples=2, gram=gram)

    @property
    def domain(self):
        return float(self.ts[0]), float(self.ts[-1])

    @property
    def dim(self) -> int:
        return self.mats[0].shape[0]

    def matrix_at(self, t: float) -> np.ndarray:
        a, b = self.domain
        if not (a - 1e-12 <= t <= b + 1e-12):
            raise InputError(f"t={t} outside the path domain [{a}, {b}]")
        if self._func is not None:
            return as_matrix(self._func(float(t)), "path sample")
        i = bisect.bisect_right(self.ts, t) - 1
        i = min(max(i, 0), len(self.ts) - 2)
        t0, t1 = self.ts[i], self.ts[i + 1]
        lam = (t - t0) / (t1 - t0)
        return (1.0 - lam) * self.mats[i] + lam * self.mats[i + 1]

    def form_at(self, t: float) -> SymmetricForm:
        key = float(t)
        form = self._cache.get(key)
        if form is None:
            m = self.matrix_at(key)
            form = SymmetricForm(0.5 * (m + m.T), self.gram)
            if len(self._cache) < 64:
                self._cache[key] = form
        return form

    def eigenvalues_at(self, t: float, tol: Tolerance | None = None) -> np.ndarray:
        w, _ = self.form_at(t).pencil_eig(tol)
        return w


@dataclass(frozen=True)
class FlowReport:
    sf: int
    method: str
    endpoint_nullities: tuple
    min_endpoint_gap: float
    partition: list | None = None
    warnings: tuple = ()

    def to_dict(self):
        return {
            "sf": self.sf,
            "method": self.method,
            "endpoint_nullities": list(self.endpoint_nullities),
            "min_endpoint_gap": self.min_endpoint_gap,
            "partition": None if self.partition is None else
                [[t0, t1, a] for (t0, t1, a) in self.partition],
            "warnings": list(self.warnings),
        }


def _endpoint_counts(path: OperatorPath, tol: Tolerance):
    a, b = path.domain
    wa = path.eigenvalues_at(a, tol)
    wb = path.eigenvalues_at(b, tol)
    ia = inertia_counts(wa, tol)
    ib = inertia_counts(wb, tol)
    gap = min(min_band_gap(wa, tol), min_band_gap(wb, tol))
    warnings = []
    if ia[1]:
        warnings.append(f"degenerate left endpoint (nullity {ia[1]})")
    if ib[1]:
        warnings.append(f"degenerate right endpoint (nullity {ib[1]})")
    return ia, ib, gap, warnings


def sf_endpoints(path: OperatorPath, tol: Tolerance | None = None) -> FlowReport:
    """Spectral flow from the endpoint data alone, cross-checked through the
    subspace route (relative dimension of the negative eigenspaces)."""
    tol = tol or DEFAULT_TOL
    ia, ib, gap, warnings = _endpoint_counts(path, tol)
    sf = ia[0] - ib[0]
    a, b = path.domain
    split_a = spectral_split(path.form_at(a), tol)
    split_b = spectral_split(path.form_at(b), tol)
    rel = relative_dimension(split_a.v_minus, split_b.v_minus, tol)
    if rel != sf:
        raise NumericalFailure(
            f"endpoint count {sf} disagrees with relative dimension {rel}")
    return FlowReport(sf, "endpoints", (ia[1], ib[1]), gap, None, tuple(warnings))


@dataclass(frozen=True)
class PartitionControl:
    check_points: int = 64
    max_bisections: int = 20
    min_margin_rel: float = 1e-8


def _candidate_thresholds(path, t0, t1, control, tol):
    """Threshold candidates (a, margin) for [t0, t1], derived from the
    spectra at the segment's endpoints and midpoint only; the dense check
    grid later accepts or rejects them."""
    probes = [t0, 0.5 * (t0 + t1), t1]
    spectra = np.sort(np.abs(np.array(
        [path.eigenvalues_at(t, tol) for t in probes])), axis=1)
    n = spectra.shape[1]
    scale = float(np.max(spectra)) if spectra.size else 0.0
    floor = max(tol.abs_zero, control.min_margin_rel * max(scale, 1.0))
    out = []
    for r in range(n + 1):
        lower = float(np.max(spectra[:, r - 1])) if r > 0 else 0.0
        upper = float(np.min(spectra[:, r])) if r < n else \
            2.0 * lower + max(scale, 1.0)
        margin = upper - lower
        if margin > 2.0 * floor:
            out.append((0.5 * (lower + upper), margin))
    out.sort(key=lambda c: -c[1])
    return out, floor


def _verify_threshold(path, t0, t1, a_i, floor, control, tol):
    """Check on the dense grid that the band rank is constant and that no
    eigenvalue comes within `floor` of +/-a_i.  Returns the observed margin
    or None."""
    grid = np.linspace(t0, t1, control.check_points)
    counts = set()
    margin = float("inf")
    for t in grid:
        w = np.abs(path.eigenvalues_at(float(t), tol))
        counts.add(int(np.sum(w <= a_i)))
        if w.size:
            margin = min(margin, float(np.min(np.abs(w - a_i))))
    if len(counts) > 1 or margin <= floor:
        return None
    return margin


def sf_partition(path: OperatorPath, control: PartitionControl | None = None,
                 tol: Tolerance | None = None) -> FlowReport:
    """Spectral flow by band-rank bookkeeping over an adaptive partition:
    on each subinterval a threshold a_i is chosen so that the rank of the
    band projection is constant (verified on a dense check grid); the flow
    is the telescoped difference of the nonnegative-band ranks."""
    tol = tol or DEFAULT_TOL
    control = control or PartitionControl()
    a, b = path.domain

    segments = []

    def solve(t0, t1, depth):
        candidates, floor = _candidate_thresholds(path, t0, t1, control, tol)
        for a_i, _sel_margin in candidates:
            margin = _verify_threshold(path, t0, t1, a_i, floor, control, tol)
            if margin is not None:
                segments.append((t0, t1, a_i, margin))
                return
        if depth >= control.max_bisections:
            raise NumericalFailure(
                f"partition refinement exhausted on [{t0:g}, {t1:g}]: an "
                "eigenvalue hugs every candidate threshold")
        tm = 0.5 * (t0 + t1)
        solve(t0, tm, depth + 1)
        solve(tm, t1, depth + 1)

    for t0, t1 in zip(path.ts, path.ts[1:]):
        solve(float(t0), float(t1), 0)

    ia, ib, gap, warnings = _endpoint_counts(path, tol)

    def band_count(t, a_i, endpoint):
        w = path.eigenvalues_at(t, tol)
        lo = -tol.zero_band(float(np.max(np.abs(w))) if w.size else 0.0) \
            if endpoint else 0.0
        return int(np.sum((w >= lo) & (w <= a_i)))

    sf = 0
    for k, (t0, t1, a_i, _margin) in enumerate(segments):
        left_end = k == 0
        right_end = k == len(segments) - 1
        sf += band_count(t1, a_i, right_end) - band_count(t0, a_i, left_end)
    partition = [(t0, t1, a_i) for (t0, t1, a_i, _m) in segments]
    warn_margin = min(m for (_t0, _t1, _a, m) in segments)
    warnings.append(f"threshold margin {warn_margin:.3e}")
    return FlowReport(sf, "partition", (ia[1], ib[1]), gap, partition,
                      tuple(warnings))


def restricted_path(path: OperatorPath, v: Subspace) -> OperatorPath:
    """The path of compressions of the forms onto a fixed subspace."""
    if v.ambient_dim != path.dim:
        raise InputError(
            f"subspace lives in R^{v.ambient_dim}, path in R^{path.dim}")
    q = v.basis
    gram = None
    if path.gram is not None:
        gram = q.T @ path.gram @ q
    mats = [q.T @ m @ q for m in path.mats]
    func = None
    if path._func is not None:
        base = path._func
        func = lambda t: q.T @ as_matrix(base(t), "sample") @ q
    return OperatorPath(path.ts, mats, gram, func=func)


def sf_restricted(path: OperatorPath, v: Subspace,
                  tol: Tolerance | None = None) -> FlowReport:
    """Spectral flow of the path compressed onto a fixed subspace."""
    report = sf_endpoints(restricted_path(path, v), tol)
    return FlowReport(report.sf, "restricted", report.endpoint_nullities,
                      report.min_endpoint_gap, None, report.warnings)


@dataclass(frozen=True)
class ReductionReport:
    """Both sides of the fixed-subspace restriction identity.

    lhs = sf(full) - sf(restricted); rhs is assembled from the boundary data
    at each endpoint: the Morse index of the form on the B-orthogonal
    complement of V, the dimension of V cap V^{perp_B}, and the dimension of
    V cap ker B.  The identity holds exactly: lhs == rhs.
    """

    lhs: int
    rhs: int
    sf_full: int
    sf_restricted: int
    terms_a: tuple
    terms_b: tuple

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs

    def to_dict(self):
        return {
            "lhs": self.lhs, "rhs": self.rhs,
            "sf_full": self.sf_full, "sf_restricted": self.sf_restricted,
            "terms_a": list(self.terms_a), "terms_b": list(self.terms_b),
            "ok": self.ok,
        }


def _boundary_terms(form: SymmetricForm, v: Subspace, tol: Tolerance):
    from .forms import b_orthocomplement
    from .subspaces import subspace_intersection

    vb = b_orthocomplement(form, v, tol)
    n2 = morse_index(restrict_form(form, vb), tol)
    cap_vb = subspace_intersection(v, vb, tol).dim
    cap_ker = subspace_intersection(v, form.operator_kernel(tol), tol).dim
    return n2, cap_vb, cap_ker


def verify_reduction(path: OperatorPath, v: Subspace,
                     tol: Tolerance | None = None) -> ReductionReport:
    """Exercise the fixed-subspace restriction formula on one path."""
    tol = tol or DEFAULT_TOL
    full = sf_endpoints(path, tol)
    rest = sf_restricted(path, v, tol)
    a, b = path.domain
    terms_a = _boundary_terms(path.form_at(a), v, tol)
    terms_b = _boundary_terms(path.form_at(b), v, tol)
    rhs = (terms_a[0] + terms_a[1] - terms_a[2]) \
        - (terms_b[0] + terms_b[1] - terms_b[2])
    return ReductionReport(full.sf - rest.sf, rhs, full.sf, rest.sf,
                           terms_a, terms_b)


def _flatten(path: OperatorPath, family: SubspacePath | None):
    """Change coordinates so the Gram matrix becomes the identity; integer
    invariants are unchanged (cogredience)."""
    if path.gram is None:
        return path, family
    l = cholesky_spd(path.gram)

    def flat_matrix(m):
        c = scipy.linalg.solve_triangular(l, m, lower=True)
        c = scipy.linalg.solve_triangular(l, c.T, lower=True).T
        return 0.5 * (c + c.T)

    mats = [flat_matrix(m) for m in path.mats]
    func = None
    if path._func is not None:
        base = path._func
        func = lambda t: flat_matrix(as_matrix(base(t), "sample"))
    flat_path = OperatorPath(path.ts, mats, None, func=func)
    if family is None:
        return flat_path, None

    def flat_subspace(s: Subspace) -> Subspace:
        return Subspace.from_spanning(l.T @ s.basis, s.ambient_dim)

    samples = [(t, flat_subspace(s)) for t, s in family.samples]
    interp = None
    if family.interpolate is not None:
        base_i = family.interpolate
        interp = lambda t: flat_subspace(base_i(t))
    return flat_path, SubspacePath(samples, interpolate=interp)


def _varying_endpoint_forms(path: OperatorPath, family: SubspacePath,
                            initial, tol: Tolerance):
    """Shared machinery for the varying-domain flow: lift the family to an
    orthogonal path, compress the endpoint forms onto the moving frame, and
    return everything needed by the verifier."""
    fpath, ffam = _flatten(path, family)
    pa, pb = fpath.domain
    fa, fb = ffam.domain
    if abs(pa - fa) > 1e-10 or abs(pb - fb) > 1e-10:
        raise InputError("family domain must match the path domain")
    phis = lift_path(ffam, initial=initial)
    v0 = ffam.samples[0][1]
    if initial is None:
        q_ref = v0.basis
    else:
        q_ref = as_matrix(initial, "initial").T @ v0.basis
    frame_a = phis[0] @ q_ref
    frame_b = phis[-1] @ q_ref
    ca = fpath.form_at(pa).matrix
    cb = fpath.form_at(pb).matrix
    ta = SymmetricForm(0.5 * ((frame_a.T @ ca @ frame_a)
                              + (frame_a.T @ ca @ frame_a).T))
    tb = SymmetricForm(0.5 * ((frame_b.T @ cb @ frame_b)
                              + (frame_b.T @ cb @ frame_b).T))
    return fpath, ta, tb, frame_a, frame_b


def sf_varying(path: OperatorPath, family: SubspacePath,
               tol: Tolerance | None = None, initial=None) -> FlowReport:
    """Spectral flow of the path restricted to a varying family of
    subspaces, through an orthogonal trivialization built by path lifting.
    The integer does not depend on the initial isometry chosen."""
    tol = tol or DEFAULT_TOL
    _, ta, tb, _, _ = _varying_endpoint_forms(path, family, initial, tol)
    wa, _ = ta.pencil_eig(tol)
    wb, _ = tb.pencil_eig(tol)
    ia = inertia_counts(wa, tol)
    ib = inertia_counts(wb, tol)
    gap = min(min_band_gap(wa, tol), min_band_gap(wb, tol))
    warnings = []
    if ia[1] or ib[1]:
        warnings.append("degenerate restricted endpoint")
    return FlowReport(ia[0] - ib[0], "varying", (ia[1], ib[1]), gap, None,
                      tuple(warnings))


@dataclass(frozen=True)
class VaryingReductionReport:
    lhs: int
    rhs: int
    sf_full: int
    sf_varying: int
    rel_dim_a: int
    rel_dim_b: int

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs

    def to_dict(self):
        return {
            "lhs": self.lhs, "rhs": self.rhs, "sf_full": self.sf_full,
            "sf_varying": self.sf_varying,
            "rel_dim_a": self.rel_dim_a, "rel_dim_b": self.rel_dim_b,
            "ok": self.ok,
        }


def verify_reduction_varying(path: OperatorPath, family: SubspacePath,
                             tol: Tolerance | None = None,
                             initial=None) -> VaryingReductionReport:
    """Exercise the varying-domain restriction identity: the difference of
    flows equals the difference of endpoint relative dimensions between the
    negative eigenspaces of the full and trivialized restricted forms."""
    tol = tol or DEFAULT_TOL
    fpath, ta, tb, frame_a, frame_b = _varying_endpoint_forms(
        path, family, initial, tol)
    full = sf_endpoints(fpath, tol)
    wa, _ = ta.pencil_eig(tol)
    wb, _ = tb.pencil_eig(tol)
    sf_vary = inertia_counts(wa, tol)[0] - inertia_counts(wb, tol)[0]

    def rel_dim(t, small_form, frame):
        split_full = spectral_split(fpath.form_at(t), tol)
        small_split = spectral_split(small_form, tol)
        emb = Subspace(orthonormal_basis(frame @ small_split.v_minus.basis, tol),
                       fpath.dim)
        return relative_dimension(split_full.v_minus, emb, tol)

    a, b = fpath.domain
    rel_a = rel_dim(a, ta, frame_a)
    rel_b = rel_dim(b, tb, frame_b)
    return VaryingReductionReport(full.sf - sf_vary, rel_a - rel_b,
                                  full.sf, sf_vary, rel_a, rel_b)


def cogredient_transform(path: OperatorPath, transforms,
                         tol: Tolerance | None = None) -> OperatorPath:
    """Path of congruences S_t^T B_t S_t on the same sample grid; the inner
    product is untouched, so the spectral flow is preserved."""
    tol = tol or DEFAULT_TOL
    if len(transforms) != len(path.ts):
        raise InputError("need one transform per path sample")
    ss = [as_matrix(s, "transform") for s in transforms]
    for s in ss:
        if s.shape != (path.dim, path.dim):
            raise InputError("transform has the wrong shape")
        _, sv, _ = svd(s)
        if sv.size == 0 or sv[-1] <= tol.zero_band(sv[0]):
            raise InputError("transform is numerically singular")
    mats = [s.T @ m @ s for s, m in zip(ss, path.mats)]
    return OperatorPath(path.ts, mats, path.gram)


def eigenvalue_trace(path: OperatorPath, num: int | None = None,
                     tol: Tolerance | None = None):
    """Rows (t, lambda_1..lambda_N) of the pencil eigenvalues along the
    path, for CSV export and plotting."""
    if num is None:
        ts = path.ts
    else:
        a, b = path.domain
        ts = np.linspace(a, b, num)
    return [(float(t), path.eigenvalues_at(float(t), tol)) for t in ts]
