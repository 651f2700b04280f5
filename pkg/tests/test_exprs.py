import numpy as np
import pytest

from hesscone.exprs import Expr, ParseError, parse


def test_parse_and_eval_polynomial():
    e = Expr(2, "0.5*(x0^2+x1^2-1)")
    pts = np.array([[1.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
    assert np.allclose(e.value(pts), [0.0, -0.5, 0.5])


def test_gradient_and_hessian_ball():
    e = Expr(2, "0.5*(x0^2+x1^2-1)")
    pts = np.array([[0.3, -0.4]])
    assert np.allclose(e.gradient(pts), [[0.3, -0.4]])
    assert np.allclose(e.hessian(pts)[0], np.eye(2))


def test_annulus_product_derivatives():
    e = Expr(2, "(x0^2+x1^2-4)*(x0^2+x1^2-1)")
    x = np.array([[1.0, 0.0]])
    # rho = r^4 - 5 r^2 + 4: grad = (4 r^2 - 10) x, hess = (4r^2-10)I + 8 x x^T
    assert np.allclose(e.value(x), [0.0])
    assert np.allclose(e.gradient(x), [[-6.0, 0.0]])
    assert np.allclose(e.hessian(x)[0], np.diag([2.0, -6.0]))


def test_functions_chain():
    e = Expr(1, "exp(sin(x0))")
    x = np.array([[0.7]])
    v = float(e.value(x)[0])
    g = float(e.gradient(x)[0, 0])
    h = float(e.hessian(x)[0, 0, 0])
    assert v == pytest.approx(np.exp(np.sin(0.7)))
    assert g == pytest.approx(np.cos(0.7) * v)
    assert h == pytest.approx(v * (np.cos(0.7) ** 2 - np.sin(0.7)))


def test_log_sqrt_div():
    e = Expr(1, "log(x0)/sqrt(x0)")
    x = np.array([[2.0]])
    fd = (Expr(1, "log(x0)/sqrt(x0)").value(np.array([[2.0 + 1e-6]]))
          - e.value(np.array([[2.0 - 1e-6]]))) / 2e-6
    assert float(e.gradient(x)[0, 0]) == pytest.approx(float(fd[0]), rel=1e-8)


def test_unary_minus_and_powers():
    e = Expr(1, "-x0^3 + 2")
    assert float(e.value(np.array([[2.0]]))[0]) == pytest.approx(-6.0)
    assert float(e.gradient(np.array([[2.0]]))[0, 0]) == pytest.approx(-12.0)


def test_constants():
    e = Expr(1, "pi*x0")
    assert float(e.value(np.array([[1.0]]))[0]) == pytest.approx(np.pi)


def test_vectorized_broadcast_constant_expr():
    e = Expr(2, "3.5")
    pts = np.zeros((7, 2))
    assert e.value(pts).shape == (7,)
    assert e.gradient(pts).shape == (7, 2)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("x0 +")
    with pytest.raises(ParseError):
        parse("y1 + 2")
    with pytest.raises(ParseError):
        parse("x0 ^ x0")


def test_hessian_symmetric():
    e = Expr(3, "x0*x1^2 + exp(x2)*x0")
    pts = np.array([[0.5, -1.0, 0.25]])
    H = e.hessian(pts)[0]
    assert np.allclose(H, H.T)
    assert H[0, 1] == pytest.approx(-2.0)
    assert H[0, 2] == pytest.approx(np.exp(0.25))
