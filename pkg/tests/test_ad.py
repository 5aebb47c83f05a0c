import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import ad

xs = st.floats(-2.0, 2.0, allow_nan=False)


@given(xs)
def test_elementary_functions_match_closed_form_derivatives(x):
    cases = [
        (ad.sin, np.cos(x), -np.sin(x)),
        (ad.cos, -np.sin(x), -np.cos(x)),
        (ad.exp, np.exp(x), np.exp(x)),
        (ad.sinh, np.cosh(x), np.sinh(x)),
        (ad.arctan, 1 / (1 + x * x), -2 * x / (1 + x * x) ** 2),
    ]
    for fn, d1, d2 in cases:
        _, g, h = ad.derivatives(lambda v: fn(v[0]), np.array([x]))
        assert g[0] == pytest.approx(d1, abs=1e-12)
        assert h[0, 0] == pytest.approx(d2, abs=1e-12)


@given(xs, xs)
def test_product_and_quotient_rules(a, b):
    f = lambda v: v[0] * v[0] * v[1] / (2.0 + v[1] * v[1])
    _, g, h = ad.derivatives(f, np.array([a, b]))
    den = 2.0 + b * b
    assert g[0] == pytest.approx(2 * a * b / den, abs=1e-12)
    assert h[0, 0] == pytest.approx(2 * b / den, abs=1e-12)
    assert h[0, 1] == pytest.approx(h[1, 0], abs=1e-14)
    assert h[0, 1] == pytest.approx(2 * a * (2 - b * b) / den ** 2, abs=1e-12)


def test_quadratic_form_hessian_is_exact():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    f = lambda v: 0.5 * ad.einsum("i,ij,j->", v, A, v)
    val, g, h = ad.derivatives(f, np.array([0.3, -0.7]))
    assert np.allclose(h, A, atol=0, rtol=0)
    assert np.allclose(g, A @ [0.3, -0.7], atol=1e-15)


def test_matrix_inverse_derivative():
    # d(M⁻¹) = −M⁻¹ dM M⁻¹
    def M(v):
        return ad.array([[2.0 + v[0], v[1]], [v[1], 1.0]])

    p = np.array([0.1, 0.2])
    Minv = ad.inv(M(ad.Jet.seed(p)))
    M0 = np.linalg.inv(np.array([[2.1, 0.2], [0.2, 1.0]]))
    dM = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert np.allclose(Minv.val, M0, atol=1e-14)
    assert np.allclose(ad.value(Minv.d(0)), -M0 @ dM @ M0, atol=1e-14)


def test_constants_have_zero_derivatives():
    val, g, h = ad.derivatives(lambda v: 3.0, np.array([1.0, 2.0]))
    assert val == 3.0 and not g.any() and not h.any()


def test_mpmath_scalars_keep_precision():
    with mpmath.workdps(40):
        x = mpmath.mpf(1) / 3
        assert isinstance(ad.sin(x), mpmath.mpf)
        assert abs(ad.sqrt(x) ** 2 - x) < mpmath.mpf(10) ** -38
