import numpy as np
import pytest

from sfkit.errors import InputError, NumericalFailure
from sfkit.flow import (
    OperatorPath,
    PartitionControl,
    cogredient_transform,
    eigenvalue_trace,
    sf_endpoints,
    sf_partition,
    sf_restricted,
    sf_varying,
    verify_reduction,
    verify_reduction_varying,
)
from sfkit.instances import (
    random_orthogonal,
    random_reduction_instance,
    random_symmetric_with_margin,
    random_varying_instance,
)
from sfkit.subspaces import Subspace, SubspacePath


def e(i, n):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def diag_path(*diags, ts=None):
    mats = [np.diag(np.asarray(d, dtype=float)) for d in diags]
    ts = np.linspace(0.0, 1.0, len(mats)) if ts is None else ts
    return OperatorPath.from_samples(ts, mats)


def test_sf_endpoints_examples():
    const = diag_path([1.0, -2.0], [1.0, -2.0])
    assert sf_endpoints(const).sf == 0
    up = OperatorPath.from_function(lambda t: np.diag([2 * t - 1, 1.0]), (0, 1))
    assert sf_endpoints(up).sf == 1  # eigenvalue-count oracle: n_minus 1 -> 0
    down = OperatorPath.from_function(lambda t: np.diag([1 - 2 * t, -1.0]), (0, 1))
    assert sf_endpoints(down).sf == -1  # n_minus goes 1 -> 2


def test_sf_endpoints_zero_band_convention():
    # endpoint eigenvalue inside the band counts as kernel, not negative
    path = diag_path([0.0, 1.0], [1.0, 1.0])
    rep = sf_endpoints(path)
    assert rep.sf == 0
    assert rep.endpoint_nullities == (1, 0)
    assert any("degenerate" in w for w in rep.warnings)


def test_sf_partition_matches_examples():
    up = OperatorPath.from_function(lambda t: np.diag([2 * t - 1, 1.0]), (0, 1))
    rep = sf_partition(up)
    assert rep.sf == 1
    assert rep.partition is not None and len(rep.partition) >= 1
    const = diag_path([1.0, -2.0], [1.0, -2.0])
    assert sf_partition(const).sf == 0
    quad = OperatorPath.from_function(lambda t: np.array([[t * t]]), (-1, 1))
    assert sf_partition(quad).sf == 0


def test_sf_partition_agrees_with_endpoints_random():
    rng = np.random.default_rng(31)
    for _ in range(60):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(2, 5))
        mats = [random_symmetric_with_margin(rng, n) for _ in range(k)]
        path = OperatorPath.from_samples(np.linspace(0, 1, k), mats)
        assert sf_partition(path).sf == sf_endpoints(path).sf


def test_sf_concatenation_additivity():
    rng = np.random.default_rng(32)
    for _ in range(25):
        n = int(rng.integers(1, 7))
        a, m, b = (random_symmetric_with_margin(rng, n) for _ in range(3))
        whole = OperatorPath.from_samples([0.0, 0.5, 1.0], [a, m, b])
        left = OperatorPath.from_samples([0.0, 0.5], [a, m])
        right = OperatorPath.from_samples([0.5, 1.0], [m, b])
        assert sf_endpoints(whole).sf == sf_endpoints(left).sf + sf_endpoints(right).sf


def test_sf_endpoint_only_dependence():
    rng = np.random.default_rng(33)
    for _ in range(20):
        n = int(rng.integers(1, 7))
        a, b = (random_symmetric_with_margin(rng, n) for _ in range(2))
        p1 = OperatorPath.from_samples([0, 0.4, 1], [a, random_symmetric_with_margin(rng, n), b])
        p2 = OperatorPath.from_samples([0, 0.7, 1], [a, random_symmetric_with_margin(rng, n), b])
        assert sf_endpoints(p1).sf == sf_endpoints(p2).sf


def test_cogredience_invariance():
    rng = np.random.default_rng(34)
    path = diag_path([-1.0, 1.0], [1.0, 1.0])
    base = sf_endpoints(path).sf
    same = cogredient_transform(path, [np.eye(2)] * 2)
    assert sf_endpoints(same).sf == base
    doubled = cogredient_transform(path, [2 * np.eye(2)] * 2)
    assert sf_endpoints(doubled).sf == base
    rots = [random_orthogonal(rng, 2) for _ in range(2)]
    assert sf_endpoints(cogredient_transform(path, rots)).sf == base
    with pytest.raises(InputError):
        cogredient_transform(path, [np.eye(2), np.zeros((2, 2))])


def test_sf_restricted_examples():
    path3 = OperatorPath.from_function(
        lambda t: np.diag([2 * t - 1, 1.0, -1.0]), (0, 1))
    assert sf_restricted(path3, Subspace.span_of(e(1, 3))).sf == 0
    assert sf_restricted(path3, Subspace.span_of(e(0, 3), e(1, 3))).sf == 1
    assert sf_restricted(path3, Subspace.full(3)).sf == sf_endpoints(path3).sf
    with pytest.raises(InputError):
        sf_restricted(path3, Subspace.full(2))


def test_verify_reduction_hand_cases():
    path = OperatorPath.from_function(
        lambda t: np.diag([2 * t - 1, 1.0, -1.0]), (0, 1))
    rep = verify_reduction(path, Subspace.span_of(e(0, 3), e(1, 3)))
    assert rep.terms_a == (1, 0, 0) and rep.terms_b == (1, 0, 0)
    assert rep.lhs == rep.rhs == 0
    deg = OperatorPath.from_function(lambda t: np.diag([t, 1.0]), (0, 1))
    rep = verify_reduction(deg, Subspace.span_of(e(1, 2)))
    assert rep.lhs == rep.rhs == 0
    assert rep.terms_a == (0, 0, 0)
    full = verify_reduction(path, Subspace.full(3))
    assert full.lhs == full.rhs == 0 and full.sf_restricted == full.sf_full


def test_verify_reduction_random_sweep():
    rng = np.random.default_rng(35)
    for k in range(150):
        dim = int(rng.integers(2, 13))
        codim = int(rng.integers(0, min(4, dim) + 1))
        path, v = random_reduction_instance(rng, dim, codim,
                                            degenerate=(k % 5 == 0))
        rep = verify_reduction(path, v)
        assert rep.lhs == rep.rhs, (dim, codim, k)


def test_verify_reduction_with_gram():
    rng = np.random.default_rng(36)
    from sfkit.instances import random_path, random_subspace
    for _ in range(20):
        n = int(rng.integers(2, 9))
        path = random_path(rng, n, with_gram=True)
        v = random_subspace(rng, n, int(rng.integers(1, n + 1)))
        rep = verify_reduction(path, v)
        assert rep.lhs == rep.rhs


def test_sf_varying_constant_family_matches_restricted():
    rng = np.random.default_rng(37)
    n = 6
    from sfkit.instances import random_path, random_subspace
    path = random_path(rng, n)
    v = random_subspace(rng, n, 4)
    fam = SubspacePath([(0.0, v), (0.5, v), (1.0, v)])
    assert sf_varying(path, fam).sf == sf_restricted(path, v).sf


def test_sf_varying_rotating_line_identity_form():
    path = OperatorPath.from_function(lambda t: np.eye(2), (0, 1))

    def fam(t):
        return Subspace.span_of(np.array([np.cos(t), np.sin(t)]))

    family = SubspacePath.from_function(fam, (0, 1), num=9)
    assert sf_varying(path, family).sf == 0


def test_sf_varying_rotating_plane_in_r3():
    path = OperatorPath.from_function(lambda t: np.diag([1.0, 1.0, -1.0]), (0, 1))

    def fam(t):
        rot = np.array([np.cos(t), np.sin(t), 0.0])
        return Subspace.from_spanning(np.column_stack([rot, e(2, 3)]))

    family = SubspacePath.from_function(fam, (0, 1), num=9)
    assert sf_varying(path, family).sf == 0


def test_sf_varying_trivialization_independent():
    rng = np.random.default_rng(38)
    for _ in range(15):
        path, family = random_varying_instance(rng, n=8, codim=2)
        base = sf_varying(path, family).sf
        # second run through a different initial isometry
        u = random_orthogonal(rng, 8)
        assert sf_varying(path, family, initial=u).sf == base


def test_verify_reduction_varying_sweep():
    rng = np.random.default_rng(39)
    for _ in range(30):
        path, family = random_varying_instance(rng, n=8, codim=2)
        rep = verify_reduction_varying(path, family)
        assert rep.lhs == rep.rhs
    # constant family reduces to the fixed-subspace identity
    from sfkit.instances import random_path, random_subspace
    path = random_path(rng, 6)
    v = random_subspace(rng, 6, 4)
    fam = SubspacePath([(0.0, v), (1.0, v)], interpolate=lambda t: v)
    rep = verify_reduction_varying(path, fam)
    fixed = verify_reduction(path, v)
    assert rep.lhs == rep.rhs == fixed.lhs


def test_partition_failure_is_loud():
    # eigenvalue pinned at a constant: thresholds exist, flow fine
    flat = OperatorPath.from_function(lambda t: np.array([[0.0]]), (0, 1))
    assert sf_partition(flat).sf == 0
    # oscillation invisible at the segment probes exhausts a zero budget
    wild = OperatorPath.from_function(
        lambda t: np.array([[np.sin(40 * np.pi * t)]]), (0, 1), num_samples=2)
    with pytest.raises(NumericalFailure):
        sf_partition(wild, PartitionControl(check_points=16, max_bisections=0))
    # with the default budget the refinement resolves it
    assert sf_partition(wild).sf == sf_endpoints(wild).sf


def test_eigenvalue_trace_shape():
    path = diag_path([1.0, -1.0], [2.0, -2.0])
    rows = eigenvalue_trace(path, num=5)
    assert len(rows) == 5
    t0, w0 = rows[0]
    assert t0 == 0.0 and w0.shape == (2,)
    assert np.allclose(w0, [-1.0, 1.0])


def test_operator_path_validation():
    with pytest.raises(InputError):
        OperatorPath.from_samples([0.0], [np.eye(2)])
    with pytest.raises(InputError):
        OperatorPath.from_samples([0.0, 0.0], [np.eye(2), np.eye(2)])
    with pytest.raises(InputError):
        OperatorPath.from_samples([0, 1], [np.eye(2), np.eye(3)])
    path = diag_path([1.0], [2.0])
    with pytest.raises(InputError):
        path.matrix_at(2.0)
    assert np.allclose(path.matrix_at(0.25), [[1.25]])
