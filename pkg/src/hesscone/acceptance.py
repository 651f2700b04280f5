"""Acceptance suite: independent oracles and one check per criterion.

Each criterion function returns (name, passed, detail).  `run_all` executes
the suite and prints a one-line verdict per criterion; the CLI selftest verb
and tests/test_acceptance.py both drive it from here.
"""

from __future__ import annotations

import time

import numpy as np

from .config import rng


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def affine_supremum_envelope(bpts: np.ndarray, bvals: np.ndarray,
                             queries: np.ndarray, slope_bound: float = 6.0,
                             coarse: int = 81, rounds: int = 7) -> np.ndarray:
    """Largest function below the boundary data that is a supremum of affine
    functions: u(x) = max over slopes g of [g.x + min_b (phi_b - g.x_b)].

    Brute force: a coarse slope grid followed by per-query pattern-search
    refinement (the objective is concave in g, so the window walk converges).
    Independent of the finite-difference solver path.
    """
    bpts = np.asarray(bpts, dtype=float)
    bvals = np.asarray(bvals, dtype=float)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    gs = np.linspace(-slope_bound, slope_bound, coarse)
    G = np.stack(np.meshgrid(gs, gs, indexing="ij"), axis=-1).reshape(-1, 2)
    offsets = G @ bpts.T  # (S, B)
    c = (bvals[None, :] - offsets).min(axis=1)  # (S,)
    best_val = np.full(queries.shape[0], -np.inf)
    best_g = np.zeros_like(queries)
    chunk = 200000 // max(1, queries.shape[0] // 64)
    for lo in range(0, G.shape[0], chunk):
        vals = G[lo:lo + chunk] @ queries.T + c[lo:lo + chunk, None]
        idx = vals.argmax(axis=0)
        v = vals[idx, np.arange(queries.shape[0])]
        better = v > best_val
        best_val[better] = v[better]
        best_g[better] = G[lo:lo + chunk][idx[better]]

    step = float(gs[1] - gs[0])
    local = np.stack(np.meshgrid([-2, -1, 0, 1, 2], [-2, -1, 0, 1, 2],
                                 indexing="ij"), axis=-1).reshape(-1, 2)
    for _ in range(rounds):
        cand_g = best_g[:, None, :] + step * local[None, :, :]  # (Q, 25, 2)
        cand_off = np.einsum("qsk,bk->qsb", cand_g, bpts)
        cand_c = (bvals[None, None, :] - cand_off).min(axis=2)
        cand_v = (cand_g * queries[:, None, :]).sum(axis=2) + cand_c
        pick = cand_v.argmax(axis=1)
        rows = np.arange(queries.shape[0])
        best_val = np.maximum(best_val, cand_v[rows, pick])
        best_g = cand_g[rows, pick]
        step *= 0.33
    return best_val


def tangent_plane_subbox_violation(Q: np.ndarray, grid_1d: np.ndarray,
                                   tol: float = 1e-11) -> bool:
    """Exhaustive affine-comparison check for the quadratic x^T Q x / 2.

    Tangent planes at interior grid points of every axis-aligned sub-box are
    compared against the exact maximum of the quadratic on the continuous
    sub-box boundary.  Returns True when some tangent plane strictly
    dominates a whole sub-box boundary (the comparison property fails).
    Vectorized over all (sub-box, interior point, edge) triples.
    """
    Q = np.asarray(Q, dtype=float)
    g = np.asarray(grid_1d, dtype=float)
    m = g.size
    starts, ends, x0s = [], [], []
    for i1 in range(m - 2):
        for i2 in range(i1 + 2, m):
            for j1 in range(m - 2):
                for j2 in range(j1 + 2, m):
                    corners = np.array([[g[i1], g[j1]], [g[i2], g[j1]],
                                        [g[i2], g[j2]], [g[i1], g[j2]]])
                    for ii in range(i1 + 1, i2):
                        for jj in range(j1 + 1, j2):
                            for k in range(4):
                                starts.append(corners[k])
                                ends.append(corners[(k + 1) % 4])
                                x0s.append((g[ii], g[jj]))
    s = np.array(starts)
    e = np.array(ends)
    x0 = np.array(x0s)
    d = e - s
    L = np.linalg.norm(d, axis=1)
    dh = d / L[:, None]
    w = s - x0
    alpha = 0.5 * np.einsum("pi,ij,pj->p", dh, Q, dh)
    beta = np.einsum("pi,ij,pj->p", dh, Q, w)
    gamma = 0.5 * np.einsum("pi,ij,pj->p", w, Q, w)
    end_val = alpha * L * L + beta * L + gamma
    best = np.maximum(gamma, end_val)
    tstar = np.where(alpha < 0, -beta / (2 * np.where(alpha < 0, alpha, 1.0)), -1.0)
    inside = (tstar > 0) & (tstar < L)
    vtx = alpha * tstar**2 + beta * tstar + gamma
    best = np.where(inside, np.maximum(best, vtx), best)
    # per (box, interior point): max over its 4 edges
    per_pt = best.reshape(-1, 4).max(axis=1)
    return bool((per_pt < -tol).any())


# ---------------------------------------------------------------------------
# bundled fixtures shared between criteria
# ---------------------------------------------------------------------------

BOX2 = ((-1.0, 1.0), (-1.0, 1.0))
BOX3 = ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))


def _saddle(pts):
    return pts[:, 0] ** 2 - pts[:, 1] ** 2


def _cone_dist(pts):
    return np.sqrt((pts[:, 0] - 0.3) ** 2 + pts[:, 1] ** 2)


def _cone_dist3(pts):
    return np.sqrt((pts[:, 0] - 0.2) ** 2 + pts[:, 1] ** 2 + pts[:, 2] ** 2)


def harmonic_problem(h=0.05):
    from .cones import trace_cone
    from .dirichlet import DirichletProblem
    return DirichletProblem(BOX2, h, trace_cone(2), _saddle)


def envelope_problem(h=0.05, density=32, extra_identity=False):
    from .cones import lines_cone
    from .dirichlet import DirichletProblem, trace_normalized_samples
    cone = lines_cone(2, density=density)
    samples = None
    if extra_identity:
        samples = trace_normalized_samples(cone) + [np.eye(2) / 2.0]
    return DirichletProblem(BOX2, h, cone, _cone_dist, samples=samples)


def disk_domain_problem(h=0.1):
    from .cones import lines_cone
    from .dirichlet import DirichletProblem
    inside = lambda pts: (pts ** 2).sum(axis=1) < 0.9 ** 2
    return DirichletProblem(BOX2, h, lines_cone(2, density=24), _cone_dist,
                            interior=inside)


def chain_problems_3d(h=0.1):
    """Three nested operator samples on one 21^3 grid: lines in R^3 inside
    the 2-plane family inside the full trace."""
    from .cones import lines_cone, planes_cone, trace_cone
    from .dirichlet import DirichletProblem, trace_normalized_samples
    s_trace = [np.eye(3) / 3.0]
    g2 = planes_cone(3, 2, density=24)
    s_g2 = trace_normalized_samples(g2) + s_trace
    g1 = lines_cone(3, density=48)
    s_g1 = trace_normalized_samples(g1) + s_g2
    p1 = DirichletProblem(BOX3, h, g1, _cone_dist3, samples=s_g1)
    p2 = DirichletProblem(BOX3, h, g2, _cone_dist3, samples=s_g2)
    p3 = DirichletProblem(BOX3, h, trace_cone(3), _cone_dist3, samples=s_trace)
    return p1, p2, p3


def bundled_problems():
    return [("harmonic-square", harmonic_problem()),
            ("envelope-square", envelope_problem()),
            ("envelope-disk-domain", disk_domain_problem())]


# ---------------------------------------------------------------------------
# criteria (in spec order; see run_all)
# ---------------------------------------------------------------------------

CRITERIA = []


def criterion(name):
    def wrap(fn):
        CRITERIA.append((name, fn))
        return fn
    return wrap


@criterion("1-free-dimension-table")
def _crit_free_dims(tol_override=None):
    from .cones import complex_lines_cone, free_dim_verify, lines_cone, \
        planes_cone, trace_cone
    from .garding import sigma_cone
    t0 = time.perf_counter()
    table = []
    for n in (2, 3, 4):
        table.append((lines_cone(n), 0))
        table.append((trace_cone(n), n - 1))
    for n, p in ((3, 2), (4, 2), (4, 3)):
        table.append((planes_cone(n, p), p - 1))
    table.append((complex_lines_cone(4), 2))
    for n, k in ((3, 2), (4, 2), (5, 2), (4, 3)):
        table.append((sigma_cone(n, k), n - k))
    bad = []
    for i, (cone, D) in enumerate(table):
        rep = free_dim_verify(cone, D, trials=200, seed=100 + i)
        if not (rep["lower_ok"] and rep["upper_ok"]):
            bad.append((i, D, rep["lower_ok"], rep["upper_ok"]))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60.0
    return ok, f"{len(table)} cones, failures={bad}, {dt:.1f}s (budget 60s)"


@criterion("2-dirichlet-harmonic")
def _crit_harmonic(tol_override=None):
    from .dirichlet import perron_solve
    t0 = time.perf_counter()
    prob = harmonic_problem(h=0.05)  # 41 x 41
    tol = tol_override if tol_override else 1e-8
    u, rep = perron_solve(prob, tol=tol, max_iters=60000)
    mesh = np.meshgrid(*prob.axes, indexing="ij")
    exact = mesh[0] ** 2 - mesh[1] ** 2
    err = float(np.abs((u.values - exact)[prob.interior]).max())
    dt = time.perf_counter() - t0
    if not rep.converged:
        return False, f"non-convergence at tol={tol:g}"
    ok = err < 1e-6 and dt < 10.0
    return ok, f"max interior error {err:.2e} (budget 1e-6), {dt:.1f}s (10s)"


@criterion("3-dirichlet-convex-envelope")
def _crit_envelope(tol_override=None):
    from .dirichlet import perron_solve
    t0 = time.perf_counter()
    h = 0.05
    prob = envelope_problem(h=h, density=32)
    tol = tol_override if tol_override else 1e-9
    u, rep = perron_solve(prob, tol=tol, max_iters=60000)
    if not rep.converged:
        return False, f"non-convergence at tol={tol:g}"
    bpts = prob.points[prob.boundary.ravel()]
    queries = prob.points[prob.interior.ravel()]
    oracle = affine_supremum_envelope(bpts, prob.boundary_values, queries)
    err = float(np.abs(u.values.ravel()[prob.interior.ravel()] - oracle).max())
    dt = time.perf_counter() - t0
    ok = err < 3 * h and dt < 30.0
    return ok, f"max deviation {err:.3f} (budget {3*h:.2f}), {dt:.1f}s (30s)"


@criterion("4-cone-monotonicity")
def _crit_monotonicity(tol_override=None):
    from .cones import planes_cone, trace_cone
    from .dirichlet import DirichletProblem, perron_solve
    # 2-D: lines below the 2-plane family, which IS the trace cone in R^2
    small = envelope_problem(h=0.05, extra_identity=True)
    big_trace = DirichletProblem(BOX2, 0.05, trace_cone(2), _cone_dist,
                                 samples=[np.eye(2) / 2.0])
    big_g2 = DirichletProblem(BOX2, 0.05, planes_cone(2, 2), _cone_dist,
                              samples=[np.eye(2) / 2.0])
    u0, _ = perron_solve(small, tol=1e-9)
    u1, _ = perron_solve(big_g2, tol=1e-9)
    u2, _ = perron_solve(big_trace, tol=1e-9)
    gap2 = float((u0.values - u1.values).max())
    eq = float(np.abs(u1.values - u2.values).max())
    ok2 = gap2 <= 1e-8 and eq <= 1e-8
    # 3-D chain on 21^3
    p1, p2, p3 = chain_problems_3d(h=0.1)
    v1, _ = perron_solve(p1, tol=1e-8)
    v2, _ = perron_solve(p2, tol=1e-8)
    v3, _ = perron_solve(p3, tol=1e-8)
    gap3 = max(float((v1.values - v2.values).max()),
               float((v2.values - v3.values).max()))
    ok3 = gap3 <= 1e-7
    return ok2 and ok3, (f"2-D gap {gap2:.1e}, G(2)=trace gap {eq:.1e} "
                         f"(1e-8); 3-D chain gap {gap3:.1e} (1e-7)")


@criterion("5-uniqueness-two-initializations")
def _crit_uniqueness(tol_override=None):
    from .dirichlet import perron_solve
    tol = 1e-9
    worst = 0.0
    for name, prob in bundled_problems():
        ua, ra = perron_solve(prob, tol=tol, init="harmonic")
        ub, rb = perron_solve(prob, tol=tol, init="constant")
        if not (ra.converged and rb.converged):
            return False, f"non-convergence on {name}"
        worst = max(worst, float(np.abs(ua.values - ub.values).max()))
    ok = worst <= 10 * tol
    return ok, f"worst disagreement {worst:.2e} (budget {10*tol:.0e})"


@criterion("6-subaffine-oracle-equivalence")
def _crit_subaffine(tol_override=None):
    from .fields import GridField, subaffine_check
    gen = rng(606)
    grid = np.linspace(-1.0, 1.0, 9)
    disagreements = 0
    done = 0
    while done < 200:
        g = gen.normal(size=(2, 2))
        Q = g + g.T
        if abs(np.linalg.eigvalsh(Q).max()) < 1e-4:
            continue  # resample the measure-zero boundary band
        done += 1
        mesh = np.meshgrid(grid, grid, indexing="ij")
        vals = 0.5 * (Q[0, 0] * mesh[0] ** 2 + 2 * Q[0, 1] * mesh[0] * mesh[1]
                      + Q[1, 1] * mesh[1] ** 2)
        field = GridField(BOX2, 0.25, vals)
        _, eig_verdict = subaffine_check(field)
        oracle_verdict = not tangent_plane_subbox_violation(Q, grid)
        if eig_verdict != oracle_verdict:
            disagreements += 1
    return disagreements == 0, f"200 quadratics, {disagreements} disagreements"


@criterion("7-garding-suite")
def _crit_garding(tol_override=None):
    from math import comb
    from .garding import cone_ellipticity_E2, derived_poly, det_real, \
        eval_ma, linearization, random_interior, roots_of_pA, sigma
    from .linalg import eig_sym_batch
    from .garding import MAPolynomial
    gen = rng(707)
    worst_root = 0.0
    for _ in range(100):
        n = int(gen.integers(2, 6))
        g = gen.normal(size=(n, n))
        A = 0.5 * (g + g.T)
        r = np.sort(roots_of_pA(det_real(n), A).real)
        expected = np.sort(-np.linalg.eigvalsh(A))
        worst_root = max(worst_root, float(np.abs(r - expected).max()))
    roots_ok = worst_root < 1e-8

    worst_der = 0.0
    n = 4
    for k in (1, 2, 3):
        Mk = derived_poly(det_real(n), k)
        Sk = sigma(n, k)
        for _ in range(17):
            g = gen.normal(size=(n, n))
            A = 0.5 * (g + g.T)
            err = abs(eval_ma(Mk, A) - eval_ma(Sk, A) / comb(n, k))
            worst_der = max(worst_der, err / max(1.0, abs(eval_ma(Mk, A))))
    derived_ok = worst_der < 1e-10

    e2_ok = cone_ellipticity_E2(det_real(3))["elliptic"] and \
        cone_ellipticity_E2(sigma(3, 2))["elliptic"] and \
        cone_ellipticity_E2(sigma(4, 3))["elliptic"]
    block = MAPolynomial(n=3, kind="custom", custom_degree=2,
                         func=lambda A: np.linalg.det(A[:2, :2]))
    e2_counter_ok = not cone_ellipticity_E2(block)["elliptic"]

    e3_min = np.inf
    for M in (det_real(3), sigma(3, 2)):
        for _ in range(100):
            A = random_interior(M, gen)
            tilde = linearization(M, A)
            vals, _ = eig_sym_batch(tilde.mat[None])
            e3_min = min(e3_min, float(vals[0, 0]))
    e3_ok = e3_min > 0
    ok = roots_ok and derived_ok and e2_ok and e2_counter_ok and e3_ok
    return ok, (f"roots {worst_root:.1e} (1e-8); derived {worst_der:.1e} "
                f"(1e-10); E2 {e2_ok}/counter {e2_counter_ok}; "
                f"E3 min eig {e3_min:.2e}")


@criterion("8-boundary-suite")
def _crit_boundary(tol_override=None):
    from .cones import complex_lines_cone, lines_cone, planes_cone, trace_cone
    from .garding import sigma_cone
    from .geometry import annulus_2d, \
        boundary_convexity_check, exhaustion_check, global_defining_function, \
        unit_ball
    bundles = [(unit_ball(2), (lines_cone(2), trace_cone(2))),
               (unit_ball(3), (lines_cone(3), planes_cone(3, 2), trace_cone(3),
                               sigma_cone(3, 2))),
               (unit_ball(4), (complex_lines_cone(4),))]
    worst = np.inf
    for dom, cones in bundles:
        xs = dom.boundary_sample(64, seed=808)
        for cone in cones:
            for x in xs:
                rep = boundary_convexity_check(dom, cone, x)
                if not rep["strict"]:
                    return False, f"ball not strict for {cone.family or 'garding'}"
                if np.isfinite(rep["min_pairing"]):
                    worst = min(worst, rep["min_pairing"])
    ball_ok = worst > 0

    ann = annulus_2d()
    x = np.array([1.0, 0.0])
    rep = boundary_convexity_check(ann, lines_cone(2), x)
    W = rep["witness"].mat
    grad = ann.gradient(x[None])[0]
    c_indep = abs(float(grad @ W @ grad)) < 1e-8
    annulus_ok = (not rep["weak"]) and c_indep

    margins = []
    for cone in (lines_cone(2), trace_cone(2)):
        built = global_defining_function(unit_ball(2), cone, budget=48,
                                         grid_n=61, seed=808)
        margins.append(built["constants"]["strict_margin"])
    gdf_ok = min(margins) > 0

    exh_ball = exhaustion_check(unit_ball(2), lines_cone(2), seed=808)["passes"]
    exh_ann = not exhaustion_check(ann, lines_cone(2), seed=808)["passes"]
    ok = ball_ok and annulus_ok and gdf_ok and exh_ball and exh_ann
    return ok, (f"ball margin {worst:.3f}; annulus witness C-independent "
                f"{c_indep}; rho-hat margin {min(margins):.3f}; exhaustion "
                f"ball {exh_ball} / annulus fails {exh_ann}")


@criterion("9-distance-squared-hessian")
def _crit_dist_sq(tol_override=None):
    from .cones import lines_cone, trace_cone
    from .geometry import SubmanifoldSpec, dist_sq_hessian_check
    fixtures = [
        (SubmanifoldSpec(2, "axis-line"), np.array([0.3, 0.0]), lines_cone(2)),
        (SubmanifoldSpec(2, "circle", params=(1.0,)), np.array([1.0, 0.0]),
         trace_cone(2)),
        (SubmanifoldSpec(2, "point", params=(0.1, -0.2)),
         np.array([0.1, -0.2]), lines_cone(2)),
    ]
    worst = 0.0
    for M, x0, cone in fixtures:
        chk = dist_sq_hessian_check(M, cone, x0, h=1e-3)
        worst = max(worst, chk["max_entry_error"])
        if not chk["matches_PN"]:
            return False, f"{M.kind}: entry error {chk['max_entry_error']:.2e}"
    return worst <= 1e-4, f"worst entrywise error {worst:.2e} (budget 1e-4)"


@criterion("10-smooth-max-properties")
def _crit_smooth_max(tol_override=None):
    from .fields import smooth_max
    gen = rng(1010)
    a, b = gen.normal(size=(2, 10000))
    eps = 0.3
    m = smooth_max([a, b], eps)
    raw = np.maximum(a, b)
    two_sided = float(np.maximum((raw - m).max(), (m - raw - eps).max()))
    lam = 0.852
    trans = float(np.abs(smooth_max([a + lam, b + lam], eps) - m - lam).max())
    mono = -np.inf
    prev = m
    for e2 in (0.15, 0.075):
        cur = smooth_max([a, b], e2)
        mono = max(mono, float((cur - prev).max()))
        prev = cur
    ok = two_sided <= 1e-10 and trans <= 1e-10 and mono <= 1e-10
    return ok, (f"two-sided {two_sided:.1e}, translation {trans:.1e}, "
                f"monotone {mono:.1e} (all 1e-10)")


@criterion("11-convex-elliptic-sets")
def _crit_convex_elliptic_sets(tol_override=None):
    from .cones import BOUNDARY, ConvexEllipticSet, convex_elliptic_membership, \
        lines_cone
    from .dirichlet import DirichletProblem, ma_solve_2d
    F = ConvexEllipticSet(n=3, kind="slag-branch", level=1)
    v = convex_elliptic_membership(np.sqrt(3.0) * np.eye(3), F, tau=1e-9)
    slag_ok = v.klass == BOUNDARY and abs(v.margin) <= 1e-9

    prob = DirichletProblem(BOX2, 0.05, lines_cone(2, density=8),
                            lambda p: (p ** 2).sum(axis=1))
    u, rep = ma_solve_2d(prob, 4.0, tol=1e-9)
    mesh = np.meshgrid(*prob.axes, indexing="ij")
    exact = mesh[0] ** 2 + mesh[1] ** 2
    err = float(np.abs((u.values - exact)[prob.interior]).max())
    ma_ok = rep.converged and err < 1e-5
    return slag_ok and ma_ok, (f"slag boundary margin {abs(v.margin):.1e} "
                               f"(1e-9); det solve error {err:.2e} (1e-5)")


def run_all(selected=None, tol_override=None, out=print):
    """Run every acceptance criterion; returns list of (name, ok, detail)."""
    results = []
    for name, fn in CRITERIA:
        if selected and name not in selected:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(tol_override=tol_override)
        except Exception as exc:  # a crashed criterion is a failed criterion
            ok, detail = False, f"exception: {exc!r}"
        dt = time.perf_counter() - t0
        out(f"[{'PASS' if ok else 'FAIL'}] {name} ({dt:.1f}s) {detail}")
        results.append((name, ok, detail))
    return results
