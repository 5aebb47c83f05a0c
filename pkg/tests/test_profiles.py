import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvforge import profiles as Pr

Q = np.pi / 4


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_simpson_is_exact_on_cubics(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    got = Pr.integrate(lambda t: 3 * t ** 3 - t + 2, lo, hi, panels=4)
    exact = 0.75 * (hi ** 4 - lo ** 4) - 0.5 * (hi ** 2 - lo ** 2) + 2 * (hi - lo)
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_breakpoints_restore_accuracy_for_kinks():
    f = lambda t: np.abs(t - 0.3)
    exact = 0.5 * 0.3 ** 2 + 0.5 * 0.7 ** 2
    assert Pr.integrate(f, 0.0, 1.0, breaks=[0.3], panels=8) == pytest.approx(exact, abs=1e-14)
    assert abs(Pr.integrate(f, 0.0, 1.0, panels=8) - exact) > 1e-6


@pytest.mark.parametrize("factory", [Pr.sin2, Pr.poly4])
def test_named_profiles_are_admissible(factory):
    p = factory()
    res = p.invariant_residuals()
    assert max(res.values()) < 1e-12
    v, d1, d2 = p.d(np.array([0.0]))
    assert d1[0] == pytest.approx(1.0, abs=1e-14)


def test_sin2_derivatives_are_exact():
    t = np.linspace(0, Q, 7)
    v, d1, d2 = Pr.sin2().d(t)
    assert np.allclose(v, 0.5 * np.sin(2 * t), atol=1e-15)
    assert np.allclose(d1, np.cos(2 * t), atol=1e-15)
    assert np.allclose(d2, -2 * np.sin(2 * t), atol=1e-15)


@given(st.integers(0, 2 ** 32 - 1))
def test_random_admissible_profiles_keep_boundary_data(seed):
    p = Pr.random_admissible(np.random.default_rng(seed))
    v, d1, _ = p.d(np.array([0.0, Q]))
    assert abs(v[0]) < 1e-15
    assert d1[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(d1[1]) < 1e-12


def test_spline_profile_tracks_samples():
    t = np.linspace(0, Q, 200)
    p = Pr.from_samples(t, 0.5 * np.sin(2 * t))
    tt = np.array([0.2, 0.5])
    v, d1, _ = p.d(tt)
    assert np.allclose(v, 0.5 * np.sin(2 * tt), atol=1e-8)
    assert np.allclose(d1, np.cos(2 * tt), atol=1e-5)


def test_unknown_profile_name():
    with pytest.raises(KeyError):
        Pr.named("nope")


def test_with_s_keeps_shape():
    p = Pr.sin2(s=0.1).with_s(0.3)
    assert p.s == 0.3 and p.name == "sin2"
