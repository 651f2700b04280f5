import numpy as np
import pytest

from hesscone import rng
from hesscone.cones import lines_cone, trace_cone, psplus_membership
from hesscone.fields import (
    GridField,
    NOT_PSH,
    PARTIALLY_PLURIHARMONIC,
    PSH,
    STRICT_PSH,
    SmoothMax2,
    batch_hessians,
    convex_compose_check,
    fd_hessian_callable,
    hessian_fd,
    hull_estimate,
    psh_classify,
    smooth_max,
    smooth_max_field,
    subaffine_check,
)
from hesscone.linalg import InputError

BOX2 = ((-1.0, 1.0), (-1.0, 1.0))


def quad_field(Q, b=None, box=BOX2, h=0.1):
    Q = np.asarray(Q, dtype=float)
    b = np.zeros(Q.shape[0]) if b is None else np.asarray(b, dtype=float)

    def f(*coords):
        pts = np.stack(coords)
        val = np.zeros_like(coords[0])
        for i in range(Q.shape[0]):
            val = val + b[i] * pts[i]
            for j in range(Q.shape[0]):
                val = val + 0.5 * Q[i, j] * pts[i] * pts[j]
        return val

    return GridField.from_function(f, box, h)


# -- finite differences -------------------------------------------------

def test_hessian_exact_on_quadratics():
    gen = rng(60)
    Q = gen.normal(size=(2, 2))
    Q = Q + Q.T
    f = quad_field(Q, b=[0.3, -0.7])
    idx, H = batch_hessians(f)
    assert np.abs(H - Q).max() < 1e-9


def test_hessian_x2y_analytic():
    f = GridField.from_function(lambda x, y: x * x * y, BOX2, 0.05)
    idx, H = batch_hessians(f)
    pts = f.interior_points()
    for k in range(0, idx.shape[0], 57):
        x, y = pts[k]
        oracle = np.array([[2 * y, 2 * x], [2 * x, 0.0]])
        assert np.abs(H[k] - oracle).max() < 1e-8  # exact: cubic terms cancel


def test_hessian_affine_zero():
    f = GridField.from_function(lambda x, y: 2.0 * x - 3.0 * y + 0.5, BOX2, 0.1)
    _, H = batch_hessians(f)
    assert np.abs(H).max() < 1e-10


def test_hessian_single_point_and_range_error():
    f = quad_field(np.eye(2))
    assert np.allclose(hessian_fd(f, (5, 5)).mat, np.eye(2), atol=1e-9)
    with pytest.raises(InputError):
        hessian_fd(f, (1, 5))


def test_fd_hessian_callable():
    H = fd_hessian_callable(lambda p: p[0] ** 2 * p[1], np.array([0.4, -0.2]), 1e-3)
    assert np.abs(H - [[-0.4, 0.8], [0.8, 0.0]]).max() < 1e-7


# -- classification -----------------------------------------------------

def test_classify_strict_bowl():
    f = quad_field(np.eye(2))
    for cone in (lines_cone(2), trace_cone(2)):
        cls = psh_classify(f, cone, epsilon=0.1)
        assert cls.summary == "StrictPSH"


def test_classify_saddle_trace_partially_pluriharmonic():
    f = quad_field(np.diag([2.0, -2.0]))
    cls = psh_classify(f, trace_cone(2))
    assert cls.summary == "PartiallyPluriharmonic"
    assert np.all(cls.classes == PARTIALLY_PLURIHARMONIC)


def test_classify_saddle_convex_cone_fails():
    f = quad_field(np.diag([2.0, -2.0]))
    assert psh_classify(f, lines_cone(2)).summary == "NotPSH"


def test_classify_constant_boundary():
    f = GridField.from_function(lambda x, y: np.full_like(x, 3.0), BOX2, 0.1)
    cls = psh_classify(f, lines_cone(2))
    assert cls.summary == "PartiallyPluriharmonic"


def test_strict_epsilon_threshold():
    f = quad_field(np.diag([1.0, 1.0]))  # Hessian = diag(1,1)
    cls_small = psh_classify(f, lines_cone(2), epsilon=0.25)
    assert cls_small.summary == "StrictPSH"
    cls_big = psh_classify(f, lines_cone(2), epsilon=2.0)  # 1 - 4 < 0
    assert cls_big.summary == "PSH"


# -- subaffinity ---------------------------------------------------------

def test_subaffine_basic():
    saddle = quad_field(np.diag([2.0, -2.0]), h=0.25, box=BOX2)
    _, ok = subaffine_check(saddle)
    assert ok
    cap = quad_field(-np.eye(2), h=0.25)
    _, ok = subaffine_check(cap)
    assert not ok


def tangent_affine_oracle(Q, grid_pts_1d):
    """Exhaustive sub-box check of the affine comparison property for the
    quadratic x -> x^T Q x / 2: tangent planes at interior grid points versus
    exact maxima over the continuous sub-box boundary."""
    Q = np.asarray(Q, dtype=float)
    g = np.asarray(grid_pts_1d)
    m = g.size
    worst = np.inf
    for i1 in range(m - 2):
        for i2 in range(i1 + 2, m):
            for j1 in range(m - 2):
                for j2 in range(j1 + 2, m):
                    corners = np.array([[g[i1], g[j1]], [g[i2], g[j1]],
                                        [g[i2], g[j2]], [g[i1], g[j2]]])
                    edges = [(corners[k], corners[(k + 1) % 4]) for k in range(4)]
                    for ii in range(i1 + 1, i2):
                        for jj in range(j1 + 1, j2):
                            x0 = np.array([g[ii], g[jj]])
                            best = -np.inf
                            for s, e in edges:
                                best = max(best, _edge_max(Q, x0, s, e))
                            worst = min(worst, best)
    return worst >= -1e-11  # no tangent plane strictly dominates a sub-box


def _edge_max(Q, x0, s, e):
    d = e - s
    L = np.linalg.norm(d)
    d = d / L
    w = s - x0
    alpha = 0.5 * d @ Q @ d
    beta = d @ Q @ w
    gamma = 0.5 * w @ Q @ w
    cands = [gamma, alpha * L * L + beta * L + gamma]
    if alpha < 0:
        t = -beta / (2 * alpha)
        if 0 < t < L:
            cands.append(alpha * t * t + beta * t + gamma)
    return max(cands)


def test_subaffine_matches_subbox_oracle():
    gen = rng(61)
    grid = np.linspace(-1, 1, 9)
    agree = 0
    trials = 0
    while trials < 25:
        g = gen.normal(size=(2, 2))
        Q = g + g.T
        if abs(np.linalg.eigvalsh(Q).max()) < 1e-4:
            continue
        trials += 1
        f = quad_field(Q, h=0.25)
        _, eig_verdict = subaffine_check(f)
        assert eig_verdict == tangent_affine_oracle(Q, grid)
        agree += 1
    assert agree == 25


def test_subbox_maximum_principle_for_subaffine_fields():
    f = quad_field(np.diag([2.0, -2.0]), h=0.25)
    v = f.values
    m = v.shape[0]
    for i1 in range(0, m - 2, 2):
        for i2 in range(i1 + 2, m, 3):
            for j1 in range(0, m - 2, 2):
                for j2 in range(j1 + 2, m, 3):
                    sub = v[i1:i2 + 1, j1:j2 + 1]
                    interior = sub[1:-1, 1:-1]
                    boundary = np.concatenate([sub[0], sub[-1], sub[1:-1, 0],
                                               sub[1:-1, -1]])
                    assert interior.max() <= boundary.max() + 1e-12


# -- smoothed maxima ------------------------------------------------------

def test_smooth_max_support_exactness():
    gen = rng(62)
    eps = 0.05
    t = gen.normal(size=(2, 3000))
    far = np.abs(t[0] - t[1]) >= 2 * eps
    m = smooth_max([t[0], t[1]], eps)
    assert np.abs(m[far] - np.maximum(t[0], t[1])[far]).max() < 1e-13


def test_smooth_max_two_sided_and_ties():
    eps = 0.2
    t = np.linspace(-1, 1, 500)
    m = smooth_max([t, t], eps)
    gap = m - t
    assert np.all(gap >= 0.0) and np.all(gap <= eps)


def test_smooth_max_translation_identity():
    gen = rng(63)
    eps = 0.13
    a, b = gen.normal(size=(2, 200))
    lam = 0.7531
    err = smooth_max([a + lam, b + lam], eps) - (smooth_max([a, b], eps) + lam)
    assert np.abs(err).max() < 1e-12


def test_smooth_max_monotone_in_eps():
    gen = rng(64)
    a, b = gen.normal(size=(2, 500))
    prev = smooth_max([a, b], 0.4)
    for eps in (0.2, 0.1, 0.05):
        cur = smooth_max([a, b], eps)
        assert np.all(cur <= prev + 1e-12)
        assert np.all(cur >= np.maximum(a, b) - 1e-12)
        prev = cur


def test_smooth_max_three_streams():
    gen = rng(65)
    t = gen.normal(size=(3, 400))
    m = smooth_max(list(t), 0.1)
    raw = t.max(axis=0)
    assert np.all(m >= raw - 1e-12)
    assert np.all(m <= raw + 0.1 + 1e-12)


def test_smooth_max_rejects_bad_eps():
    with pytest.raises(InputError):
        smooth_max([np.zeros(3), np.ones(3)], 0.0)


def test_smooth_max_field_psh_stability():
    # max of cone-classified quadratics stays classified away from the kink
    f1 = quad_field(np.diag([2.0, 0.5]))
    f2 = quad_field(np.diag([0.5, 2.0]), b=[0.1, 0.0])
    eps = f1.h ** 2
    merged = smooth_max_field([f1, f2], eps)
    cls = psh_classify(merged, lines_cone(2))
    gap = np.abs(f1.values - f2.values)
    safe_dist = 4 * (f1.h * 3.0 + eps)  # gradient bound times stencil reach
    pts_gap = gap[tuple(cls.indices.T)]
    safe = pts_gap > safe_dist
    assert np.all(cls.classes[safe] >= PSH)


def test_decreasing_limit_stability():
    # f >= g on the grid: the smoothed maxima decrease to max(f, g) = f
    f = quad_field(np.diag([2.0, 1.0]))
    g = quad_field(np.diag([1.0, 0.5]), b=[0.0, 0.0])
    g = GridField(g.box, g.h, g.values - 2.0)
    cone = lines_cone(2)
    prev = None
    for eps in (0.8, 0.4, 0.2, 0.1, 0.05):
        m = smooth_max_field([f, g], eps)
        assert psh_classify(m, cone).all_psh
        if prev is not None:
            assert np.all(m.values <= prev + 1e-12)
        prev = m.values
    assert np.abs(prev - f.values).max() <= 0.05 + 1e-12


def test_viscosity_touching_quadratics():
    # any C^2 function touching a classified field from above at an interior
    # point has its Hessian in the cone up to tolerance
    gen = rng(66)
    f = GridField.from_function(lambda x, y: np.exp(x) + 0.5 * (x + y) ** 2, BOX2, 0.1)
    cone = lines_cone(2)
    assert psh_classify(f, cone).all_psh
    idx, H = batch_hessians(f)
    for _ in range(40):
        k = int(gen.integers(0, idx.shape[0]))
        mu = float(abs(gen.normal()))
        Hphi = H[k] + 2 * mu * np.eye(2)  # jet + mu |x - x0|^2 touches from above
        assert psplus_membership(Hphi, cone, tau=1e-7).inside


# -- composition ---------------------------------------------------------

def test_convex_compose_exp():
    f = quad_field(np.eye(2))
    for cone in (lines_cone(2), trace_cone(2)):
        assert convex_compose_check(f, np.exp, cone)


def test_convex_compose_identity():
    f = quad_field(np.diag([2.0, -2.0]))
    assert convex_compose_check(f, lambda t: t, trace_cone(2))


def test_convex_compose_smoothed_relu_sq_harmonic():
    # psi(t) = smoothed max(t,0)^2 on a harmonic field stays subharmonic;
    # chain rule oracle: psi' Hess + psi'' grad x grad has trace >= 0
    f = quad_field(np.diag([2.0, -2.0]))
    sm = SmoothMax2(1e-3)

    def psi(t):
        return sm.value(np.asarray(t, dtype=float), np.zeros_like(t)) ** 2

    assert convex_compose_check(f, psi, trace_cone(2), tau=1e-7)
    # oracle at a sample point
    x = np.array([0.5, 0.25])
    grad = np.array([2.0, -1.0]) * x * [1.0, 1.0]
    grad = np.array([2 * x[0], -2 * x[1]])
    t = x[0] ** 2 - x[1] ** 2
    p1 = 2.0 * float(sm.value(np.array([t]), np.array([0.0]))[0]) * \
        float(sm.profile_d1(np.array([t]))[0])
    hess_chain = p1 * np.diag([2.0, -2.0])
    assert np.trace(hess_chain) >= -1e-9  # psi' >= 0 and harmonic part cancels


# -- hulls ----------------------------------------------------------------

def test_hull_segment_converges_to_convex_hull():
    K = np.array([[-1.0, 0.0], [1.0, 0.0]])
    mask = hull_estimate(K, lines_cone(2), ((-1.5, 1.5), (-1.5, 1.5)), 0.05,
                         budget=3000, seed=19)
    pts = np.stack([m.ravel() for m in mask.meshes()], axis=1)
    kept = mask.values.ravel() > 0.5
    # Hausdorff distance of the kept set to the segment below 2h
    seg_dist = np.maximum(np.abs(pts[:, 1]), 0.0) + np.maximum(np.abs(pts[:, 0]) - 1.0, 0.0)
    assert seg_dist[kept].max() < 2 * 0.05 + 1e-9
    on_seg = (np.abs(pts[:, 1]) < 1e-9) & (np.abs(pts[:, 0]) <= 1.0)
    assert kept[on_seg].all()  # the hull contains the set


def test_hull_monotone_in_budget():
    K = np.array([[-1.0, 0.0], [1.0, 0.0]])
    small = hull_estimate(K, lines_cone(2), ((-1.5, 1.5), (-1.5, 1.5)), 0.1,
                          budget=100, seed=19)
    big = hull_estimate(K, lines_cone(2), ((-1.5, 1.5), (-1.5, 1.5)), 0.1,
                        budget=800, seed=19)
    assert np.all(big.values <= small.values)  # more budget excludes more


def test_hull_disk_not_excluded_for_trace_cone():
    theta = np.linspace(0, 2 * np.pi, 48, endpoint=False)
    K = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    mask = hull_estimate(K, trace_cone(2), ((-1.2, 1.2), (-1.2, 1.2)), 0.1,
                         budget=2000, seed=23)
    pts = np.stack([m.ravel() for m in mask.meshes()], axis=1)
    inside = (pts ** 2).sum(axis=1) <= (1.0 - 1e-9) ** 2
    assert mask.values.ravel()[inside].all()  # maximum principle protects the disk


# -- serialization ---------------------------------------------------------

def test_csv_roundtrip(tmp_path):
    f = quad_field(np.diag([1.0, -0.5]), b=[0.2, 0.1])
    path = str(tmp_path / "field.csv")
    f.write_csv(path)
    g = GridField.read_csv(path)
    assert g.box == f.box
    assert g.h == f.h
    assert np.array_equal(g.values, f.values)
    import json as _json
    with open(path + ".json") as fh:
        meta = _json.load(fh)
    assert meta["schema_version"] == 1 and meta["n"] == 2
