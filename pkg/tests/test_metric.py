import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import fixtures as F
from curvforge.errors import DegeneratePlaneError, DomainError, GeodesicDomainExit, NotPositiveDefiniteError
from curvforge.metric import (Plane, TangentVector, check_spd, christoffel, christoffel_fd, geodesic_flow,
                              geodesic_residual, killing_residual, metric_compatibility_residual, riemann,
                              riemann_fd, sectional)

FLAT = ["flat_r2", "flat_r3", "flat_r4", "flat_t2", "flat_t3", "flat_t4", "polar_flat"]


def sec(name, p, u, v):
    return sectional(F.metric(name), Plane.at(np.asarray(p, float), np.asarray(u, float), np.asarray(v, float)))


@pytest.mark.parametrize("name", FLAT)
def test_flat_fixtures_have_zero_curvature(name, rng):
    g = F.metric(name)
    for p in g.chart.sample(rng, 3):
        assert np.abs(riemann(g, p).components).max() < 1e-12


def test_polar_christoffels():
    r = 1.7
    gam = christoffel(F.metric("polar_flat"), [r, 0.4])
    assert gam[0, 1, 1] == pytest.approx(-r, abs=1e-12)
    assert gam[1, 0, 1] == pytest.approx(1 / r, abs=1e-12)
    assert gam[1, 1, 0] == pytest.approx(1 / r, abs=1e-12)


@pytest.mark.parametrize("name,p,expected", [
    ("s2_round", [0.9, 1.0], 1.0),
    ("s2_stereo", [0.3, -1.2], 1.0),
    ("s2_half", [0.6, 2.0], 4.0),
    ("warped_sin", [1.3, 0.5], 1.0),
    ("warped_sinh", [0.8, 0.5], -1.0),
    ("conformal_gauss", [0.0, 0.0], -2.0),
])
def test_surface_gauss_curvature(name, p, expected):
    assert sec(name, p, [1, 0], [0, 1]) == pytest.approx(expected, abs=1e-9)


def test_round_s3_is_constant_curvature(rng):
    for name in ("s3_round", "s3_pullback", "s3_stereo"):
        g = F.metric(name)
        p = g.chart.sample(rng, 1)[0]
        for _ in range(3):
            u, v = rng.normal(size=3), rng.normal(size=3)
            assert sectional(g, Plane.at(p, u, v)) == pytest.approx(1.0, abs=1e-9)


def test_s2xs2_mixed_planes_are_flat():
    p = [1.0, 0.3, 2.0, 4.0]
    assert sec("s2xs2", p, [1, 0, 0, 0], [0, 0, 1, 0]) == pytest.approx(0.0, abs=1e-12)
    assert sec("s2xs2", p, [0, 1, 0, 0], [0, 0, 0, 1]) == pytest.approx(0.0, abs=1e-12)
    assert sec("s2xs2", p, [1, 0, 0, 0], [0, 1, 0, 0]) == pytest.approx(1.0, abs=1e-9)


def test_heisenberg_sectionals():
    # orthonormal frame X = ∂x, Y = ∂y − x∂z, Z = ∂z; classical values −3/4, 1/4, 1/4
    x = 0.7
    p = [x, 0.2, 1.0]
    X, Y, Z = [1, 0, 0], [0, 1, -x], [0, 0, 1]
    assert sec("product_twist", p, X, Y) == pytest.approx(-0.75, abs=1e-10)
    assert sec("product_twist", p, X, Z) == pytest.approx(0.25, abs=1e-10)
    assert sec("product_twist", p, Y, Z) == pytest.approx(0.25, abs=1e-10)


def test_warped_r3_tangential_plane():
    c, r = 0.05, 0.8
    f, df = r + c * r ** 3, 1 + 3 * c * r ** 2
    got = sec("warped_r3", [r, 0, 0], [0, 1, 0], [0, 0, 1])
    assert got == pytest.approx((1 - df ** 2) / f ** 2, abs=1e-9)
    assert got < 0


names = st.sampled_from(sorted(F.CATALOG))


@given(names, st.integers(0, 2 ** 32 - 1))
def test_riemann_symmetries(name, seed):
    g = F.metric(name)
    p = g.chart.sample(np.random.default_rng(seed), 1)[0]
    res = riemann(g, p).symmetry_residuals()
    assert max(res.values()) < 1e-10


@given(names, st.integers(0, 2 ** 32 - 1))
def test_jet_and_finite_difference_routes_agree(name, seed):
    g = F.metric(name)
    p = g.chart.sample(np.random.default_rng(seed), 1)[0]
    assert np.abs(christoffel(g, p) - christoffel_fd(g, p)).max() < 1e-6
    assert np.abs(riemann(g, p).components - riemann_fd(g, p).components).max() < 1e-4
    assert max(metric_compatibility_residual(g, p)) < 1e-10


@given(st.integers(0, 2 ** 32 - 1), st.tuples(*[st.floats(-2, 2)] * 4))
def test_sectional_is_independent_of_plane_basis(seed, m):
    a, b, c, d = m
    if abs(a * d - b * c) < 0.1:
        return
    g = F.metric("warped_r3")
    rng = np.random.default_rng(seed)
    p = g.chart.sample(rng, 1)[0]
    u, v = rng.normal(size=3), rng.normal(size=3)
    k1 = sectional(g, Plane.at(p, u, v))
    k2 = sectional(g, Plane.at(p, a * u + b * v, c * u + d * v))
    assert k1 == pytest.approx(k2, rel=1e-9, abs=1e-10)


def test_degenerate_plane_raises():
    with pytest.raises(DegeneratePlaneError):
        sec("flat_r3", [0, 0, 0], [1, 0, 0], [2, 0, 0])


def test_domain_and_spd_errors():
    g = F.metric("s2_round")
    with pytest.raises(DomainError):
        g([4.0, 0.0])
    with pytest.raises(NotPositiveDefiniteError):
        check_spd([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(NotPositiveDefiniteError):
        check_spd([[1.0, 0.5], [0.0, 1.0]])


def test_equator_is_a_geodesic_with_constant_energy():
    g = F.metric("s2_round")
    v0 = TangentVector([np.pi / 2, 0.1], [0.0, 1.0])
    curve = geodesic_flow(g, v0, 2.0, 200)
    assert np.abs(curve.points[:, 0] - np.pi / 2).max() < 1e-10
    e = curve.energies(g)
    assert np.abs(e - e[0]).max() < 1e-10
    assert geodesic_residual(g, curve) < 1e-7


def test_geodesic_leaving_chart_raises():
    g = F.metric("flat_r2")
    with pytest.raises(GeodesicDomainExit) as exc:
        geodesic_flow(g, TangentVector([0.0, 0.0], [5.0, 0.0]), 10.0, 100)
    assert exc.value.args


def test_killing_fields():
    g = F.metric("s2_round")
    p = np.array([1.0, 0.5])
    assert killing_residual(g, p, lambda x: np.array([0.0, 1.0])) < 1e-12
    assert killing_residual(g, p, lambda x: np.array([1.0, 0.0])) > 0.1
