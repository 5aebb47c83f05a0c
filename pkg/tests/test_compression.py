import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import ad, compression as C
from curvforge.errors import HypothesisError

Q = np.pi / 4
nus = st.floats(1e-3, 1e-1)
rhos = st.floats(0.5, 2.0)


@given(nus, rhos, st.floats(0.0, 1.0))
def test_closed_form_matches_extended_precision_oracle(nu, rho, u):
    cfg = C.CompressionConfig(rho=rho, nu=nu)
    t = 0.02 * nu + u * (Q - 1e-3 - 0.02 * nu)
    a = C.psi_derivatives(cfg, t)
    b = C.numerical_derivatives(cfg, t)
    assert C.relative_error(a[0], b[0]) < 1e-6
    assert C.relative_error(a[1], b[1]) < 1e-6


def test_transcription_on_random_configs(rng):
    for cfg, t in C.random_configs(rng, 200):
        a = C.psi_derivatives(cfg, t)
        b = C.numerical_derivatives(cfg, t)
        assert C.relative_error(a[0], b[0]) < 1e-6
        assert C.relative_error(a[1], b[1]) < 1e-6


def test_double_precision_oracles_lose_digits_on_the_plateau():
    # ν = 0.00226, ρ = 1.616 near t = π/4: ψ′ is a 1e6-fold cancellation
    a = 2 * (1.0346566 - 1.0)
    phi = lambda t: 0.5 * ad.sin(2.0 * t) + 0.25 * a * ad.sin(2.0 * t) ** 2
    ratio = lambda t: 1.0 + 0.5 * a * ad.sin(2.0 * t)
    cfg = C.CompressionConfig(rho=1.6163381515665645, nu=0.002260401783007759, phi_inf=phi, ratio=ratio)
    t = 0.7083560091919257
    exact = C.psi_derivatives(cfg, t)[1]
    assert C.relative_error(exact, C.numerical_derivatives(cfg, t)[1]) < 1e-9
    assert C.relative_error(exact, C.numerical_derivatives(cfg, t, method="fd")[1]) > 1e-6


def test_derivatives_at_the_zero_of_psi_inf():
    cfg = C.CompressionConfig(rho=1.0, nu=1e-3)
    d1, d2 = C.psi_derivatives(cfg, 0.0)
    assert d1 == 1.0 and d2 == 0.0
    # and the one-sided limit agrees
    assert C.psi_derivatives(cfg, 1e-9)[0] == pytest.approx(1.0, abs=1e-6)


@given(nus, rhos, st.floats(1e-4, Q))
def test_compressed_profile_is_dominated(nu, rho, t):
    cfg = C.CompressionConfig(rho=rho, nu=nu)
    v = float(C.psi_nu_l(cfg, t))
    assert 0 < v <= 0.5 * np.sin(2 * t) + 1e-15
    assert v <= nu / rho + 1e-15
    assert float(C.psi_nu_l(cfg.with_nu(nu / 2), t)) <= v


def test_lower_bound_true_minimum():
    # at t = ν the profile sits at ψ∞ ≈ ν, D² ≈ 1 + ρ², so (ψ′)² ≈ (1 + ρ²)^{-3}
    for rho in (0.5, 1.0, 2.0):
        b = C.compression_bounds(C.CompressionConfig(rho=rho, nu=1e-4), nus=())
        assert b.lower_argmin == pytest.approx(1e-4)
        assert b.lower_min == pytest.approx((1 + rho * rho) ** -3, rel=1e-2)


def test_lower_bound_skipped_for_large_nu():
    b = C.compression_bounds(C.CompressionConfig(nu=0.05), nus=())
    assert b.lower_min is None and b.skipped


def test_upper_bound_decays_at_least_as_fast_as_predicted():
    b = C.compression_bounds(C.CompressionConfig(rho=1.0, beta=0.5))
    assert b.exponent_expected == pytest.approx(5 / 3)
    assert b.exponent_at_least()
    sups = [row[1] for row in b.sweep]
    assert sups == sorted(sups, reverse=True)


def test_second_derivative_sign_above_threshold():
    cfg = C.CompressionConfig(rho=1.0, nu=1e-3, C1=4.0)
    rep = C.second_derivative_report(cfg)
    assert rep.asserted and rep.min_above > 0
    assert rep.threshold == pytest.approx(1e-3 / np.sqrt(3) + 1e-4)
    assert rep.c1_bound == pytest.approx(4.0, abs=1e-9)


def test_c1_hypothesis():
    with pytest.raises(HypothesisError):
        C.check_c1(C.CompressionConfig(C1=4.5))


def test_ratio_estimate_margin():
    m, rows = C.peters_grid(C.CompressionConfig(rho=1.0, nu=1e-3))
    assert m >= -1e-8
    assert not any(r.skipped for r in rows)


def test_cheeger_paraboloid_agrees_with_compression():
    for l in (0.5, 1.0, 2.0):
        assert C.paraboloid_check(l) < 1e-12


def test_hypotheses_of_default_profile():
    h = C.CompressionConfig().hypotheses()
    assert h["psi_at_zero"] < 1e-15 and h["dpsi_at_zero_minus_1"] < 1e-15
    assert h["ddpsi_positive_part"] == 0.0


def test_unknown_oracle_method():
    with pytest.raises(ValueError):
        C.numerical_derivatives(C.CompressionConfig(), 0.3, method="nope")
