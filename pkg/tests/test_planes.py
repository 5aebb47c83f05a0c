import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import fixtures as F, planes as P
from curvforge.errors import DegeneratePlaneError, HypothesisError
from curvforge.metric import riemann, sectional

seeds = st.integers(0, 2 ** 32 - 1)
S2S2_POINT = np.array([1.0, 0.3, 2.0, 4.0])


def test_zero_planes_on_s2xs2_are_flat_and_mixed():
    g = F.metric("s2xs2")
    found = P.find_zero_planes(g, [S2S2_POINT])
    assert found
    for z in found:
        assert abs(z.curv) < P.ZERO_THRESHOLD
        assert abs(sectional(g, z.plane)) < 1e-9
        u, v = z.plane.u.components, z.plane.v.components
        # a flat plane of S²×S² meets each factor in a line
        B = np.stack([u, v], axis=1)
        assert np.linalg.matrix_rank(B[:2], tol=1e-6) == 1
        assert np.linalg.matrix_rank(B[2:], tol=1e-6) == 1


def test_zero_plane_search_is_deterministic():
    g = F.metric("s2xs2")
    a = P.find_zero_planes(g, [S2S2_POINT], seed=5)
    b = P.find_zero_planes(g, [S2S2_POINT], seed=5)
    assert [z.curv for z in a] == [z.curv for z in b]
    assert all(np.array_equal(x.plane.u.components, y.plane.u.components) for x, y in zip(a, b))


def test_positive_and_negative_fixtures():
    assert P.find_zero_planes(F.metric("s3_round"), [np.array([0.6, 1.0, 2.0])]) == []
    assert P.min_sectional(F.metric("s3_round"), np.array([0.6, 1.0, 2.0])) == pytest.approx(1.0, abs=1e-8)
    assert P.min_sectional(F.metric("s2xs2"), S2S2_POINT) == pytest.approx(0.0, abs=1e-9)
    assert P.min_sectional(F.metric("product_twist"), np.array([0.3, 0.1, 1.0])) == pytest.approx(-0.75, abs=1e-8)


@given(seeds, st.floats(-1, 1), st.floats(-1, 1))
def test_neighborhood_polynomial_matches_direct_curvature(seed, sigma, tau):
    g = F.metric("s2xs2")
    r = np.random.default_rng(seed)
    X, W = np.array([1.0, 0, 0, 0]), np.array([0, 0, 1.0, 0])
    Z, V = r.normal(size=4), r.normal(size=4)
    poly = P.neighborhood_polynomial(g, S2S2_POINT, X, W, Z, V)
    R = riemann(g, S2S2_POINT)
    assert poly(sigma, tau) == pytest.approx(R.curv(X + sigma * Z, W + tau * V), abs=1e-9)
    assert poly.low_order_residual < 1e-9
    q, qq = poly.quad_form(), P.quad_form(g, S2S2_POINT, X, W, Z, V)
    assert np.allclose(q.matrix(), qq.matrix(), atol=1e-10)


def test_quad_nondegeneracy_factor_assignment_on_s2xs2():
    g = F.metric("s2xs2")
    s1, s2 = np.sin(S2S2_POINT[0]), np.sin(S2S2_POINT[2])
    X, W = np.array([1.0, 0, 0, 0]), np.array([0, 0, 1.0, 0])
    Z1, V2 = np.array([0, 1 / s1, 0, 0]), np.array([0, 0, 0, 1 / s2])
    Z2, V1 = np.array([0, 0, 0, 1 / s2]), np.array([0, 1 / s1, 0, 0])
    ok, m = P.quad_nondegeneracy(P.quad_form(g, S2S2_POINT, X, W, Z1, V2))
    assert not ok and abs(m) < 1e-12
    ok, m = P.quad_nondegeneracy(P.quad_form(g, S2S2_POINT, X, W, Z2, V1))
    assert ok and m > 0.5


def test_neighborhood_polynomial_preconditions():
    g = F.metric("s2xs2")
    with pytest.raises(HypothesisError):
        P.neighborhood_polynomial(g, S2S2_POINT, [1.0, 0, 0, 0], [0, 1.0, 0, 0], np.ones(4), np.ones(4))
    with pytest.raises(DegeneratePlaneError):
        P.neighborhood_polynomial(g, S2S2_POINT, [1.0, 0, 0, 0], [2.0, 0, 0, 0], np.ones(4), np.ones(4))


def test_c2_close_regression():
    g = F.metric("s2xs2")
    s1, s2 = np.sin(S2S2_POINT[0]), np.sin(S2S2_POINT[2])
    X, W = np.array([1.0, 0, 0, 0]), np.array([0, 0, 1.0, 0])
    good = P.neighborhood_polynomial(g, S2S2_POINT, X, W, [0, 0, 0, 1 / s2], [0, 1 / s1, 0, 0])
    ok, worst, where = P.c2_close_regression(good, good)
    assert ok and worst >= -1e-12 and where is None
    bad = P.NeighborhoodPolynomial(good.coefficients - np.array([[0, 0, 0], [0, 0, 0], [0, 0, 5e3]]),
                                   good.quadruple, 0.0)
    ok, worst, where = P.c2_close_regression(good, bad)
    assert ok and worst < 0 and where is not None
    flat = P.neighborhood_polynomial(g, S2S2_POINT, X, W, [0, 1 / s1, 0, 0], [0, 0, 0, 1 / s2])
    assert P.c2_close_regression(flat, good)[0] is False


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.5, 2))
def test_qtau_min_is_the_minimum(cw, r, cv):
    m = P.qtau_min(cw, r, cv)
    tau_star = -r / cv
    assert P.qtau(cw, r, cv, tau_star) == pytest.approx(m, abs=1e-12)
    taus = np.linspace(-3, 3, 61)
    assert np.all(P.qtau(cw, r, cv, taus) >= m - 1e-12)


def test_qtau_min_degenerate_cases():
    assert P.qtau_min(0.3, 0.1, -1.0) == -np.inf
    assert P.qtau_min(0.3, 0.0, 0.0) == 0.3


def test_quad_decomposition_helicoidal_sums_to_total():
    r = 1.2
    setup = P.helicoidal_setup(1.0)
    x = np.array([r, 0, 0.4, 0])
    X, W = np.array([1, 0, 0, 0.0]), np.array([0, 0, 1, 0.0])
    Z, V = np.array([0.5, 0.3, 0.2, -0.3 * r]), np.array([0.1, 1, 0.4, -r])
    d = P.quad_decomposition(setup, x, X, W, Z, V)
    assert d.residual < 1e-10
    assert np.abs(d.a_cheeger).max() > 1e-3 and np.abs(d.a_pi).max() > 1e-3
    assert P.hat_lift_residual(setup, x, V) < 1e-10


def test_quad_decomposition_flat_torus_is_all_zero():
    setup = P.torus_setup(1.0)
    x = np.array([1.0, 2, 3, 4])
    d = P.quad_decomposition(setup, x, np.array([1, 0, 0, 0.0]), np.array([0, 1, 0, 0.0]),
                             np.array([0.2, 0.3, 0.5, 0]), np.array([0.1, 0.2, 0.7, 0]))
    assert d.residual < 1e-12
    assert all(np.abs(c).max() < 1e-12 for c in d.summands().values())
    assert not d.nondegenerate


def test_quad_setup_needs_abelian_action():
    from curvforge.deform import so3_space
    with pytest.raises(HypothesisError):
        P.QuadSetup(F.metric("flat_r3"), so3_space(), 1.0, None, None, None, None)
