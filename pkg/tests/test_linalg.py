import numpy as np
import pytest

from hesscone import rng
from hesscone.linalg import (
    InputError,
    Plane,
    SymMatrix,
    eig_sym,
    eig_sym_batch,
    frob_inner,
    outer,
    plane_projection,
    trace_on_plane,
    unpack_upper,
)


def random_sym(gen, n, scale=1.0):
    m = gen.normal(size=(n, n)) * scale
    return SymMatrix(m + m.T)


def test_eig_identity():
    es = eig_sym(SymMatrix.identity(3))
    assert np.allclose(es.values, [1.0, 1.0, 1.0])


def test_eig_diagonal_sorted():
    es = eig_sym(SymMatrix.diag(1.0, -2.0))
    assert np.allclose(es.values, [-2.0, 1.0])


def test_eig_residual_random_4x4():
    gen = rng(7)
    for _ in range(20):
        A = random_sym(gen, 4)
        es = eig_sym(A)
        scale = 1.0 + A.norm()
        for i in range(4):
            r = A.mat @ es.vectors[:, i] - es.values[i] * es.vectors[:, i]
            assert np.linalg.norm(r) < 1e-10 * scale
        assert np.abs(es.vectors.T @ es.vectors - np.eye(4)).max() < 1e-10


def test_eig_reconstruction():
    gen = rng(8)
    for n in (2, 3, 5, 8):
        A = random_sym(gen, n)
        es = eig_sym(A)
        err = np.abs(es.reconstruct() - A.mat).max()
        assert err < 1e-10 * (1.0 + A.norm())


def test_eig_deterministic():
    gen = rng(9)
    A = random_sym(gen, 6)
    e1 = eig_sym(A)
    e2 = eig_sym(SymMatrix(A.mat.copy()))
    assert np.array_equal(e1.values, e2.values)
    assert np.array_equal(e1.vectors, e2.vectors)


def test_eig_batch_matches_single():
    gen = rng(10)
    mats = np.stack([random_sym(gen, 3).mat for _ in range(11)])
    vals, vecs = eig_sym_batch(mats)
    for i in range(11):
        es = eig_sym(mats[i])
        assert np.allclose(vals[i], es.values, atol=1e-12)


def test_eig_rejects_nonfinite():
    with pytest.raises(InputError):
        eig_sym(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_projection_axis():
    P = plane_projection(Plane.axis(2, 0))
    assert np.allclose(P.mat, np.diag([1.0, 0.0]))


def test_projection_diagonal_line():
    xi = Plane.span([1.0, 1.0])
    P = plane_projection(xi)
    assert np.allclose(P.mat, [[0.5, 0.5], [0.5, 0.5]])


def test_projection_coordinate_2plane():
    P = plane_projection(Plane.axis(3, 0, 1))
    assert np.allclose(P.mat, np.diag([1.0, 1.0, 0.0]))


def test_projection_idempotent_and_trace():
    gen = rng(11)
    for p in (1, 2, 3):
        v = gen.normal(size=(p, 5))
        xi = Plane.span(*v)
        P = plane_projection(xi).mat
        assert np.abs(P @ P - P).max() < 1e-12
        assert abs(np.trace(P) - p) < 1e-12


def test_plane_rejects_nonorthonormal():
    with pytest.raises(InputError):
        Plane(2, np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_trace_on_plane_trivial():
    assert trace_on_plane(SymMatrix.diag(2.0, 3.0), Plane.axis(2, 0)) == pytest.approx(2.0)
    A = SymMatrix.diag(1.0, 2.0, 3.0)
    assert trace_on_plane(A, Plane.axis(3, 0, 1)) == pytest.approx(3.0)


def test_trace_dual_route():
    gen = rng(12)
    for _ in range(50):
        A = random_sym(gen, 4)
        v = gen.normal(size=(2, 4))
        xi = Plane.span(*v)
        via_pairing = frob_inner(A, plane_projection(xi))
        via_basis = trace_on_plane(A, xi)
        assert abs(via_pairing - via_basis) < 1e-12 * (1.0 + A.norm())


def test_frob_inner_basics():
    for n in (1, 2, 5):
        assert frob_inner(SymMatrix.identity(n), SymMatrix.identity(n)) == pytest.approx(n)
    P1 = plane_projection(Plane.axis(2, 0))
    P2 = plane_projection(Plane.axis(2, 1))
    assert frob_inner(P1, P2) == pytest.approx(0.0)


def test_frob_inner_dimension_mismatch():
    with pytest.raises(InputError):
        frob_inner(SymMatrix.identity(2), SymMatrix.identity(3))


def test_pairing_cross_check_random():
    gen = rng(13)
    for _ in range(100):
        n = int(gen.integers(2, 6))
        A = random_sym(gen, n)
        p = int(gen.integers(1, n + 1))
        xi = Plane.span(*gen.normal(size=(p, n)))
        assert frob_inner(A, plane_projection(xi)) == pytest.approx(
            trace_on_plane(A, xi), abs=1e-12 * (1 + A.norm())
        )


def test_quadratic_form_route():
    gen = rng(14)
    for _ in range(30):
        A = random_sym(gen, 3)
        e = gen.normal(size=3)
        e /= np.linalg.norm(e)
        Pe = plane_projection(Plane.span(e))
        assert frob_inner(Pe, A) == pytest.approx(float(e @ A.mat @ e), abs=1e-12 * (1 + A.norm()))


def test_projection_pairing_nonnegative():
    gen = rng(15)
    for _ in range(40):
        xi = Plane.span(*gen.normal(size=(2, 4)))
        eta = Plane.span(*gen.normal(size=(2, 4)))
        val = frob_inner(plane_projection(xi), plane_projection(eta))
        proj = xi.basis @ eta.basis.T
        assert val == pytest.approx(float((proj**2).sum()), abs=1e-12)
        assert val >= -1e-12


def test_pack_unpack_roundtrip():
    gen = rng(16)
    A = random_sym(gen, 4)
    B = SymMatrix.from_upper(A.entries, 4)
    assert np.array_equal(A.mat, B.mat)
    assert unpack_upper(A.entries, 4)[0, 3] == A.mat[0, 3]


def test_outer_matches_projection_for_unit():
    v = np.array([3.0, 4.0]) / 5.0
    assert np.allclose(outer(v).mat, plane_projection(Plane.span(v)).mat)
