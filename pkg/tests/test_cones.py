import numpy as np
import pytest

from hesscone import rng
from hesscone.cones import (
    BOUNDARY,
    INTERIOR,
    OUTSIDE,
    ConeSpec,
    ConfigurationError,
    ConvexEllipticSet,
    complex_lines_cone,
    convex_elliptic_membership,
    dual_membership,
    ellipticity_check,
    free_dim_verify,
    free_subspace_check,
    lines_cone,
    margin_batch,
    planes_cone,
    polar_check,
    psplus_membership,
    ray_cone_membership,
    trace_cone,
)
from hesscone.linalg import Plane, SymMatrix


def sym(gen, n, scale=1.0):
    g = gen.normal(size=(n, n)) * scale
    return 0.5 * (g + g.T)


# -- membership -------------------------------------------------------

def test_psd_cone_basic_verdicts():
    cone = lines_cone(2, density=16)
    assert psplus_membership(np.eye(2), cone).klass == INTERIOR
    assert psplus_membership(np.diag([1.0, 0.0]), cone).klass == BOUNDARY
    assert psplus_membership(np.diag([1.0, -1.0]), cone).klass == OUTSIDE


def test_trace_cone_boundary():
    v = psplus_membership(np.diag([5.0, -5.0]), trace_cone(2))
    assert v.klass == BOUNDARY
    assert abs(v.margin) < 1e-12


def test_membership_scaling_invariance():
    gen = rng(21)
    cone = lines_cone(3, density=32)
    for _ in range(50):
        A = sym(gen, 3)
        k0 = psplus_membership(A, cone).klass
        for s in (1e-3, 7.0, 1e4):
            assert psplus_membership(s * A, cone).klass == k0


def test_positivity_psd_never_outside():
    gen = rng(22)
    for cone in (lines_cone(3), trace_cone(3), planes_cone(3, 2),
                 complex_lines_cone(4)):
        for _ in range(30):
            B = sym(gen, cone.n)
            vals = np.linalg.eigvalsh(B)
            A = B - (vals.min() - 1e-3) * np.eye(cone.n)  # PSD by construction
            assert psplus_membership(A, cone).klass != OUTSIDE


def test_membership_zero_matrix_boundary():
    assert psplus_membership(np.zeros((2, 2)), lines_cone(2)).klass == BOUNDARY


def test_witness_is_polar_element():
    cone = lines_cone(2, density=8)
    v = psplus_membership(np.diag([1.0, -2.0]), cone)
    # worst pairing is attained on the e2 line
    assert v.witness is not None
    assert abs(v.witness.mat[1, 1] - 1.0) < 1e-9


# -- dual membership --------------------------------------------------

def test_dual_membership_examples():
    cone = lines_cone(2)
    assert dual_membership(np.diag([1.0, -5.0]), cone).inside
    assert dual_membership(-np.eye(2), cone).klass == OUTSIDE


def test_dual_trace_oracle():
    cone = trace_cone(3)
    gen = rng(23)
    for _ in range(100):
        B = sym(gen, 3)
        expected = np.trace(B) >= 0
        assert dual_membership(B, cone).inside == expected or abs(np.trace(B)) < 1e-9


def test_dual_is_negated_interior_complement():
    cone = lines_cone(2)
    gen = rng(24)
    for _ in range(100):
        B = sym(gen, 2)
        inside_dual = dual_membership(B, cone).inside
        neg_interior = psplus_membership(-B, cone).klass == INTERIOR
        assert inside_dual == (not neg_interior)


def test_boundary_is_cone_cap_negated_dual():
    # Boundary of the cone = members whose negation is dual-inside
    cone = lines_cone(2, density=32)
    gen = rng(25)
    for _ in range(200):
        A = sym(gen, 2)
        v = psplus_membership(A, cone, tau=1e-7)
        both = v.inside and dual_membership(-A, cone, tau=1e-7).inside
        assert (v.klass == BOUNDARY) == both


def test_dual_membership_subaffine_characterization():
    # B is dual-inside iff A + B stays subaffine (max eigenvalue >= 0) for
    # every member A.  Inside direction: random members never violate.
    # Outside direction: an explicit violating member exists.
    gen = rng(26)
    for cone, member, violator in (
            (trace_cone(2), _trace_member, _trace_violator),
            (lines_cone(2), _psd_member, _psd_violator)):
        for _ in range(40):
            B = sym(gen, 2)
            if abs(dual_membership(B, cone).margin) < 1e-6:
                continue  # skip the boundary band
            if dual_membership(B, cone).inside:
                for _ in range(40):
                    A = member(gen)
                    assert np.linalg.eigvalsh(A + B).max() >= -1e-8
            else:
                A = violator(B)
                assert psplus_membership(A, cone).inside
                assert np.linalg.eigvalsh(A + B).max() < 0


def _trace_member(gen):
    A = sym(gen, 2)
    return A - (np.trace(A) / 2.0 - abs(gen.normal())) * np.eye(2)


def _trace_violator(B):
    eps = -np.trace(B) / 4.0  # positive exactly when B is outside the dual
    return -B - eps * np.eye(2)


def _psd_member(gen):
    A = sym(gen, 2)
    return A - (np.linalg.eigvalsh(A).min() - abs(gen.normal())) * np.eye(2)


def _psd_violator(B):
    return np.zeros((2, 2))


# -- ellipticity ------------------------------------------------------

def test_elliptic_psd_cone():
    rep = ellipticity_check(lines_cone(2, density=16))
    assert rep["positivity"] and rep["completeness"] and rep["elliptic"]
    assert rep["span_dim"] == 3


def test_fixed_axis_incomplete():
    rep = ellipticity_check(ConeSpec(n=2, family="fixed-axis"))
    assert rep["positivity"] is True
    assert rep["completeness"] is False
    assert rep["span_dim"] == 1


def test_generated_nonpositive():
    cone = ConeSpec(n=2, kind="generated",
                    generators=(SymMatrix.diag(1.0, -0.1), SymMatrix.identity(2)))
    rep = ellipticity_check(cone)
    assert rep["positivity"] is False


def test_completeness_matches_sphere_probe():
    # common-degenerate-direction probe: inf over sampled unit e of the max
    # generator value A(e, e) is (near) zero exactly when completeness fails
    gen = rng(27)
    for cone, expect in ((lines_cone(2, density=16), True),
                         (ConeSpec(n=2, family="fixed-axis"), False),
                         (trace_cone(3), True)):
        base = cone.polar_samples()
        probes = gen.normal(size=(500, cone.n))
        probes /= np.linalg.norm(probes, axis=1)[:, None]
        quad = np.einsum("bi,gij,bj->bg", probes, base, probes)
        inf_max = quad.max(axis=1).min()
        rep = ellipticity_check(cone)
        assert rep["completeness"] == expect
        if expect:
            assert inf_max > 1e-3
        else:
            assert inf_max < 1e-3


def test_empty_generators_rejected():
    with pytest.raises(ConfigurationError):
        ConeSpec(n=2, kind="generated", generators=())


# -- polar checks -----------------------------------------------------

def test_polar_self_duality_psd():
    rep = polar_check(lines_cone(2, density=24), trials=30, seed=3)
    assert rep["bipolar_ok"]
    assert rep["all_generators_supported"]


def test_polar_ray_through_identity():
    cone = ConeSpec(n=2, kind="generated", generators=(SymMatrix.identity(2),))
    assert psplus_membership(np.diag([1.0, -0.5]), cone).klass == INTERIOR
    assert psplus_membership(np.diag([1.0, -1.0]), cone).klass == BOUNDARY
    rep = polar_check(cone, trials=20, seed=4)
    assert rep["bipolar_ok"] and rep["all_generators_supported"]


def test_psd_matrices_agree_in_both_roles():
    # self-polarity: random PSD matrices are members and pair >= 0 with members
    gen = rng(28)
    cone = lines_cone(3, density=48)
    for _ in range(40):
        g = gen.normal(size=(3, 3))
        A = g @ g.T
        assert psplus_membership(A, cone).inside
        h = gen.normal(size=(3, 3))
        B = h @ h.T
        assert float(np.tensordot(A, B)) >= -1e-12


# -- freeness ---------------------------------------------------------

def test_free_convex_case():
    res = free_subspace_check(Plane.axis(2, 0), lines_cone(2))
    assert res["free"] is False


def test_free_trace_hyperplane():
    res = free_subspace_check(Plane.axis(3, 0, 1), trace_cone(3))
    assert res["free"] is True
    assert res["certificate"].margin > 0


def test_free_sigma2_example():
    from hesscone.garding import sigma_cone
    res = free_subspace_check(Plane.axis(3, 2), sigma_cone(3, 2))
    assert res["free"] is True


def test_free_degenerate_full_space():
    res = free_subspace_check(Plane.axis(2, 0, 1), lines_cone(2))
    assert res["degenerate"] and not res["free"]


@pytest.mark.parametrize("cone,D", [
    (lines_cone(2), 0),
    (lines_cone(3), 0),
    (trace_cone(2), 1),
    (trace_cone(4), 3),
    (planes_cone(3, 2), 1),
    (planes_cone(4, 2), 1),
    (complex_lines_cone(4), 2),
])
def test_free_dim_table(cone, D):
    rep = free_dim_verify(cone, D, trials=60, seed=13)
    assert rep["lower_ok"] and rep["upper_ok"]


def test_free_dim_bad_claim_rejected():
    rep = free_dim_verify(trace_cone(3), 1, trials=40, seed=14)
    assert rep["lower_ok"]  # 1-dim free subspaces exist
    assert not rep["upper_ok"]  # ... but so do 2-dim ones, refutation fails


def test_free_dim_out_of_range():
    from hesscone.linalg import InputError
    with pytest.raises(InputError):
        free_dim_verify(lines_cone(2), 2)


# -- convex elliptic sets ----------------------------------------------

def test_det_floor_membership():
    F = ConvexEllipticSet(n=2, kind="det-floor", level=1.0)
    assert convex_elliptic_membership(np.diag([2.0, 2.0]), F).klass == INTERIOR
    assert convex_elliptic_membership(np.diag([0.5, 0.5]), F).klass == OUTSIDE


def test_slag_branch_examples():
    F = ConvexEllipticSet(n=3, kind="slag-branch", level=1)
    assert convex_elliptic_membership(np.eye(3), F).klass == OUTSIDE
    v = convex_elliptic_membership(np.sqrt(3.0) * np.eye(3), F)
    assert v.klass == BOUNDARY


def test_ray_cone_det_floor():
    F = ConvexEllipticSet(n=2, kind="det-floor", level=1.0)
    assert ray_cone_membership(np.eye(2), F) is True
    assert ray_cone_membership(np.diag([1.0, -1.0]), F) is False
    assert ray_cone_membership(np.zeros((2, 2)), F) is True


def test_ray_cone_matches_det_closed_form():
    # det(base + t v) turning negative is exactly when the ray leaves
    F = ConvexEllipticSet(n=2, kind="det-floor", level=1.0)
    gen = rng(29)
    for _ in range(25):
        v = sym(gen, 2)
        ray_ok = ray_cone_membership(v, F, T=16.0, steps=128)
        ts = np.linspace(0, 16.0, 129)
        dets = [np.linalg.det(F.basepoint.mat + t * v) for t in ts]
        lams = [np.linalg.eigvalsh(F.basepoint.mat + t * v).min() for t in ts]
        oracle = all(d >= 1.0 - 1e-9 for d in dets) and all(l >= -1e-9 for l in lams)
        assert ray_ok == oracle


# -- batch margins and serialization ----------------------------------

def test_margin_batch_matches_single():
    gen = rng(30)
    for cone in (lines_cone(3), trace_cone(3), planes_cone(4, 2),
                 complex_lines_cone(4),
                 ConeSpec(n=3, kind="generated",
                          generators=(SymMatrix.identity(3), SymMatrix.diag(1, 1, 0)))):
        mats = np.stack([sym(gen, cone.n) for _ in range(20)])
        margins = margin_batch(cone, mats)
        for i in range(20):
            v = psplus_membership(mats[i], cone)
            assert margins[i] == pytest.approx(v.margin, abs=1e-10)


def test_lagrangian_planes_sampled():
    cone = ConeSpec(n=4, family="lagrangian-planes", density=24, seed=5)
    planes = cone.sample_planes()
    from hesscone.cones import complex_structure
    J = complex_structure(4)
    for pl in planes:
        # J maps the plane to its orthogonal complement
        assert np.abs(pl.basis @ (J @ pl.basis.T)).max() < 1e-10
    assert psplus_membership(np.eye(4), cone).klass == INTERIOR


def test_complex_lines_j_invariant():
    cone = complex_lines_cone(4, density=12)
    from hesscone.cones import complex_structure
    J = complex_structure(4)
    for pl in cone.sample_planes():
        P = pl.basis.T @ pl.basis
        assert np.abs(J @ P - P @ J).max() < 1e-10


def test_cone_json_roundtrip():
    for cone in (lines_cone(3, density=10, seed=42),
                 planes_cone(4, 2, density=6, seed=9),
                 ConeSpec(n=2, kind="generated",
                          generators=(SymMatrix.diag(1.0, 2.0),))):
        doc = cone.to_json()
        back = ConeSpec.from_json(doc)
        assert back.to_json() == doc
        gen = rng(31)
        for _ in range(10):
            A = sym(gen, cone.n)
            assert psplus_membership(A, cone).klass == psplus_membership(A, back).klass
