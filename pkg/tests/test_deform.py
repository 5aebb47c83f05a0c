import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import ad, deform as D, fixtures as F, submersion as S, suites
from curvforge.errors import HypothesisError, PairingViolation
from curvforge.metric import TangentVector, check_geodesic_preservation, geodesic_flow, riemann

seeds = st.integers(0, 2 ** 32 - 1)


# canonical variation --------------------------------------------------------------------

@pytest.mark.parametrize("s", [0.1, 0.3, 0.5])
def test_berger_sectionals(s):
    vert, hor = suites.berger(s)
    assert vert == pytest.approx(1 - s * s, abs=1e-6)
    assert hor == pytest.approx(1 + 3 * s * s, abs=1e-6)


@pytest.mark.parametrize("name", ["hopf", "product_twist", "warped_s2"])
@pytest.mark.parametrize("s", [0.1, 0.3, 0.5])
def test_canonical_variation_identities(name, s):
    worst = suites.detlef(name, s, np.random.default_rng(3))
    assert max(worst.values()) < 1e-6, worst


def test_fiber_scale_zero_is_identity_and_range_checked():
    sub = S.submersion("hopf")
    p = np.array([0.6, 1.0, 2.0])
    assert np.allclose(D.fiber_scale(sub, 0.0)(p), sub.total(p), atol=0)
    with pytest.raises(ValueError):
        D.fiber_scale(sub, 1.0)


def test_fiber_scaling_shrinks_only_the_fibre():
    sub = S.submersion("hopf")
    p = np.array([0.6, 1.0, 2.0])
    s = 0.4
    gs = D.fiber_scale(sub, s)(p)
    V = S.hopf_vertical(p)
    X, Y = S.hopf_horizontal(p)
    assert V @ gs @ V == pytest.approx(1 - s * s, abs=1e-12)
    assert X @ gs @ X == pytest.approx(1.0, abs=1e-12)
    assert abs(X @ gs @ V) < 1e-12


# conformal ------------------------------------------------------------------------------------

@given(seeds)
def test_conformal_curv_identity(seed):
    g = F.metric("flat_r3")
    r = np.random.default_rng(seed)
    a = r.uniform(-0.5, 0.5, size=2)
    f = lambda x: a[0] * x[0] * x[0] + a[1] * ad.sin(x[0])  # grad f ∥ ∂0
    p = r.uniform(-1, 1, size=3)
    lhs, rhs = D.conformal_identity(g, f, p, [0.0, 1.0, 0.0], [0.0, 0.0, 2.0])
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_conformal_identity_checks_side_conditions():
    g = F.metric("flat_r3")
    with pytest.raises(HypothesisError):
        D.conformal_identity(g, lambda x: x[0], np.zeros(3), [0, 1, 0], [1, 0, 0])


def test_conformal_gauss_matches_fixture():
    g = D.conformal(F.metric("flat_r2"), lambda x: 0.5 * (x[0] * x[0] + x[1] * x[1]))
    p = np.array([0.3, -0.2])
    assert np.allclose(g(p), F.metric("conformal_gauss")(p), atol=1e-14)


# Cheeger ---------------------------------------------------------------------------------------

@pytest.mark.parametrize("l", [0.5, 1.0, 2.0])
def test_cheeger_plane_gauss_curvature(l):
    assert suites.cheeger_gauss(l) == pytest.approx(3 / l ** 2, abs=1e-5)


def test_cheeger_pairing_and_lift_identity(rng):
    assert suites.cheeger_pairing(rng, n=30) < 1e-8
    ch = D.cheeger(F.metric("warped_r3"), D.so3_space(), 0.7)
    p = np.array([0.4, -0.3, 0.9])
    u, w = rng.normal(size=3), rng.normal(size=3)
    assert D.lift_identity_residual(ch, p, u, w) < 1e-10


def test_cheeger_large_l_recovers_metric():
    assert suites.cheeger_limit(1e6) < 1e-9


def test_cheeger_deformation_only_shrinks():
    g = F.metric("warped_r3")
    ch = D.cheeger(g, D.so3_space(), 1.3)
    p = np.array([0.5, 0.2, -0.4])
    assert np.linalg.eigvalsh(g(p) - ch.metric(p)).min() > -1e-12


def test_cheeger_rejects_non_killing_action():
    with pytest.raises(HypothesisError):
        D.cheeger(F.metric("conformal_gauss"), D.translations(2, [0]), 1.0, check_points=[np.array([0.5, 0.5])])


def test_cheeger_stabilizer_flag_at_fixed_point():
    ch = D.cheeger(F.metric("flat_r2"), D.so2_plane(), 1.0)
    assert ch.stabilizer_flag(np.zeros(2))
    assert not ch.stabilizer_flag(np.array([1.0, 0.0]))


def test_cheeger_principles_lower_bound_and_crossing():
    rows = suites.cheeger_principles()
    assert min(r.margin for r in rows) >= -1e-6
    l_curv, l_bound = suites.cheeger_crossing()
    # past the crossing the curvature turns negative; the bound predicts it no later
    assert 0.3 < l_curv < 20.0
    assert l_bound <= l_curv * (1 + 1e-6)


def test_group_bi_must_be_positive():
    with pytest.raises(ValueError):
        D.GroupActionSpec(1, lambda x: np.zeros((2, 1)), np.zeros((1, 1, 1)), -np.eye(1))


# partial conformal changes -----------------------------------------------------------------

def test_tangential_pcc_on_flat_t4():
    rep = suites.tangential_t4()
    assert rep.equality_residual < 1e-6
    assert rep.omega_residual < 1e-7


def test_tangential_pcc_with_c0_perturbation_keeps_equality():
    rep = suites.tangential_t4(perturbation=lambda x: 1e-3 * ad.sin(x[3]))
    assert rep.perturbation_size > 0
    assert rep.equality_residual < 1e-6


def test_tangential_hypothesis_failure_is_indexed():
    g = F.metric("flat_t4")
    Xd = D.coordinate_distribution(4, [0])
    Ad = D.coordinate_distribution(4, [1])
    Gd = D.coordinate_distribution(4, [2])
    f = lambda x: 0.3 * ad.sin(x[2])  # grad f leaves X
    with pytest.raises(HypothesisError) as exc:
        D.tangential_hypotheses(g, Xd, Ad, Gd, f, lambda x: np.array([1.0, 0, 0, 0]), [np.ones(4)])
    assert exc.value.index == 4


def test_orthogonal_pcc_redistributes_curvature():
    _, _, rep = suites.orthogonal_t3()
    assert np.abs(rep.residual).max() < 1e-3
    assert rep.flat_violation < 1e-8
    assert abs(rep.integral_measured) < 1e-4
    # the redistribution is genuine: both signs occur along the curve
    assert rep.measured.max() > 1e-3 and rep.measured.min() < -1e-3


def test_orthogonal_pcc_integral_is_second_order_in_eps():
    i1 = suites.orthogonal_t3(1e-2)[2].integral_measured
    i2 = suites.orthogonal_t3(2e-2)[2].integral_measured
    assert i2 / i1 == pytest.approx(4.0, rel=0.05)


def test_bump_is_smooth_and_compact():
    t = np.linspace(0, 2 * np.pi, 9)
    b = D.bump(t, np.pi, 1.0)
    assert b[4] == pytest.approx(1.0)
    assert b[0] == 0.0 and b[-1] == 0.0


def test_geodesic_preservation_under_orthogonal_pcc():
    assert suites.geodesic_preservation().residual < 1e-7


def test_geodesic_preservation_detects_pairing_change():
    g = F.metric("flat_t3")
    gt = D.partial_conformal(g, D.coordinate_distribution(3, [0]), lambda x: 2.0 + 0.0 * x[0])
    curve = geodesic_flow(g, TangentVector([0.5, 1.0, 2.0], [1.0, 0.0, 0.0]), 1.0, 50)
    with pytest.raises(PairingViolation):
        check_geodesic_preservation(g, gt, curve)


def test_geodesic_preservation_rejects_non_geodesic():
    from curvforge.metric import GeodesicCurve
    g = F.metric("flat_r2")
    t = np.linspace(0, 1, 41)
    pts = np.stack([t, t * t], axis=1)
    vel = np.stack([np.ones_like(t), 2 * t], axis=1)
    with pytest.raises(HypothesisError):
        check_geodesic_preservation(g, g, GeodesicCurve(t, pts, vel))
