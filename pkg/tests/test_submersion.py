import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import ad, fixtures as F, submersion as S
from curvforge.errors import HypothesisError
from curvforge.metric import Plane, TangentVector, riemann

NAMES = sorted(S.SUBMERSIONS)
seeds = st.integers(0, 2 ** 32 - 1)


@pytest.mark.parametrize("name", NAMES)
def test_horizontal_spaces_map_isometrically(name, rng):
    sub = S.submersion(name)
    for p in sub.total.chart.sample(rng, 3):
        assert sub.submersion_residual(p, rng) < 1e-10


@given(st.sampled_from(NAMES), seeds)
def test_split_is_orthogonal_and_complete(name, seed):
    sub = S.submersion(name)
    r = np.random.default_rng(seed)
    p = sub.total.chart.sample(r, 1)[0]
    v = r.normal(size=len(p))
    sv = S.split(sub, TangentVector(p, v))
    h, u = sv.horizontal.components, sv.vertical.components
    assert np.allclose(h + u, v, atol=1e-12)
    assert abs(h @ sub.total(p) @ u) < 1e-10
    assert np.abs(sub.differential(p) @ u).max() < 1e-10


@given(seeds)
def test_horizontal_lift_projects_back(seed):
    sub = S.submersion("hopf")
    r = np.random.default_rng(seed)
    p = sub.total.chart.sample(r, 1)[0]
    b = r.normal(size=2)
    h = sub.horizontal_lift(p, b)
    assert np.allclose(sub.differential(p) @ h, b, atol=1e-10)
    _, PV = sub.projectors(p)
    assert np.abs(PV @ h).max() < 1e-10


@given(st.sampled_from(["hopf", "product_twist", "warped_s2"]), seeds)
def test_a_tensor_antisymmetry_and_skew_adjointness(name, seed):
    sub = S.submersion(name)
    r = np.random.default_rng(seed)
    p = sub.total.chart.sample(r, 1)[0]
    PH, PV = sub.projectors(p)
    gm = sub.total(p)
    X, Y, U = PH @ r.normal(size=3), PH @ r.normal(size=3), PV @ r.normal(size=3)
    AXY, AYX = S.a_tensor(sub, p, X, Y), S.a_tensor(sub, p, Y, X)
    assert np.allclose(AXY, -AYX, atol=1e-9)
    assert abs(AXY @ gm @ U + Y @ gm @ S.a_tensor(sub, p, X, U)) < 1e-9


def test_product_has_vanishing_a_tensor():
    sub = S.submersion("product")
    p = np.array([0.3, -0.2, 1.0])
    assert np.abs(S.a_tensor(sub, p, [1, 0, 0], [0, 1, 0])).max() < 1e-14


def test_hopf_oneill_values():
    sub = S.submersion("hopf")
    p = np.array([0.6, 1.0, 2.0])
    X, Y = S.hopf_horizontal(p)
    out = S.oneill_check(sub, Plane.at(p, X, Y))
    assert out["sec_B"] == pytest.approx(4.0, abs=1e-9)
    assert out["sec_M"] == pytest.approx(1.0, abs=1e-9)
    assert out["A2"] == pytest.approx(1.0, abs=1e-9)
    assert out["residual"] < 1e-8


def test_a_tensor_rejects_vertical_argument():
    sub = S.submersion("hopf")
    p = np.array([0.6, 1.0, 2.0])
    with pytest.raises(HypothesisError):
        S.a_tensor(sub, p, S.hopf_vertical(p), [1.0, 0.0, 0.0])


def test_warped_s2_horizontal_length_profile():
    sub = S.submersion("warped_s2")
    psi = S.psi_field(sub, lambda x: np.array([0.0, 0.0, 1.0]))
    for r in (0.3, 0.9, 1.4):
        assert float(psi(np.array([r, 1.0, 2.0]))) == pytest.approx(np.sin(r) / np.sqrt(1 + np.sin(r) ** 2),
                                                                    abs=1e-13)


def test_abstract_a_tensor_lemma_on_warped_s2():
    sub = S.submersion("warped_s2")
    pts = [np.array([r, 1.0, 2.0]) for r in (0.3, 0.8, 1.3, 2.2)]
    rows = S.abstract_a_tensor_check(sub, lambda x: np.array([1.0, 0.0, 0.0]),
                                     lambda x: np.array([0.0, 0.0, 1.0]), pts)
    assert all(row.asserted for row in rows)
    assert max(row.residual for row in rows) < 1e-9


def test_abstract_a_tensor_lemma_needs_killing_field():
    sub = S.submersion("warped_s2")
    with pytest.raises(HypothesisError) as exc:
        S.abstract_a_tensor_check(sub, lambda x: np.array([1.0, 0.0, 0.0]),
                                  lambda x: ad.stack([0.0 * x[0], 0.0 * x[0], x[0]]), [np.array([0.5, 1.0, 2.0])])
    assert exc.value.index == 1


def test_base_jacobi_lemmas_on_round_sphere():
    base = F.metric("warped_sin")
    pts = [np.array([r, 0.5]) for r in (0.4, 1.0, 2.0)]
    rows = S.base_jacobi_tensors(base, lambda x: np.array([1.0, 0.0]), lambda x: np.array([0.0, 1.0]), pts)
    for row in rows:
        assert np.allclose(row.jacobi_brute, row.jacobi_formula, atol=1e-10)
        assert np.allclose(row.second_brute, row.second_formula, atol=1e-10)


def test_quotient_metric_recovers_hopf_base():
    from curvforge.metric import Chart
    total = F.metric("s3_round")
    chart = Chart.box([0.2, 0.5], [1.3, 2.0])
    gq = S.quotient_metric(total, lambda x: np.array([[0.0], [1.0], [1.0]]),
                           lambda y: ad.stack([y[0], y[1], 0.0 * y[0]]), chart)
    y = np.array([0.7, 1.1])
    assert np.allclose(gq(y), F.metric("s2_half")(y), atol=1e-12)
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    R = riemann(gq, y)
    assert R.curv(e1, e2) / (gq(y)[0, 0] * gq(y)[1, 1]) == pytest.approx(4.0, abs=1e-8)
