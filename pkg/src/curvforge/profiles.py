"""One-variable profiles ψ(t) on [0, π/4] and piecewise Simpson quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from . import ad

QUARTER = np.pi / 4
PANELS = 512


def integrate(f, a, b, breaks=(), panels=PANELS):
    """Composite Simpson with ``panels`` panels on every smooth piece of [a, b]."""
    pts = sorted({float(a), float(b), *[float(x) for x in breaks if a < x < b]})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        t = np.linspace(lo, hi, panels + 1)
        total += float(simpson(np.asarray(f(t), float), x=t))
    return total


def jet_1d(t, order=2):
    """Elementwise jet seeding an array of independent scalar parameters."""
    t = np.asarray(t, float)
    hess = np.zeros(t.shape + (1, 1)) if order >= 2 else None
    return ad.Jet(t.copy(), np.ones(t.shape + (1,)), hess)


def derivs_1d(fn, t):
    """(f, f′, f″) of a polymorphic scalar function, elementwise over ``t``."""
    out = fn(jet_1d(t))
    if not isinstance(out, ad.Jet):
        v = np.broadcast_to(np.asarray(out, float), np.shape(t))
        return v, np.zeros_like(v), np.zeros_like(v)
    return out.val, out.grad[..., 0], out.hess[..., 0, 0]


@dataclass
class PsiProfile:
    """ψ = |W^H| along an X integral curve, parametrized by arclength t."""

    psi: object                 # polymorphic t -> ψ(t)
    W_norm: float = 1.0
    s: float = 0.1
    phi_inf: object = None
    derivs: object = None       # optional vectorized t -> (ψ, ψ′, ψ″)
    interval: tuple = (0.0, QUARTER)
    breaks: tuple = ()
    name: str = "profile"
    meta: dict = field(default_factory=dict)

    def d(self, t):
        t = np.asarray(t, float)
        if self.derivs is not None:
            return self.derivs(t)
        return derivs_1d(self.psi, t)

    def value(self, t):
        return self.d(t)[0]

    def with_s(self, s):
        return PsiProfile(self.psi, self.W_norm, s, self.phi_inf, self.derivs, self.interval,
                          self.breaks, self.name, dict(self.meta))

    def invariant_residuals(self, n=1024):
        """Boundary and shape checks: ψ(0), ψ′(π/4), ψ ≤ |W|, ψ ≥ 0."""
        a, b = self.interval
        t = np.linspace(a, b, n + 1)
        v, dv, _ = self.d(t)
        return {"psi_at_start": abs(float(v[0])), "dpsi_at_end": abs(float(dv[-1])),
                "above_W": float(max(0.0, (v - self.W_norm).max())),
                "negative": float(max(0.0, -v.min()))}


def sin2(s=0.1, W_norm=1.0):
    """ψ = sin(2t)/2: zero at 0, maximum 1/2 at π/4, ψ′(0) = 1."""
    return PsiProfile(lambda t: 0.5 * ad.sin(2.0 * t), W_norm, s, name="sin2")


def poly4(s=0.1, W_norm=1.0):
    """ψ = t − t³/T² + t⁴/(2T³), T = π/4: ψ′ = (1 − u)²(1 + 2u) with u = t/T."""
    T = QUARTER

    def psi(t):
        return t - t * t * t / (T * T) + t * t * t * t / (2 * T ** 3)

    return PsiProfile(psi, W_norm, s, name="poly4")


def linear(s=0.1, W_norm=1.0, end=1.0):
    """ψ = t on [0, end]; violates ψ′(end) = 0, used for precondition cases."""
    return PsiProfile(lambda t: 1.0 * t, W_norm, s, interval=(0.0, end), name="linear")


def zero(s=0.1, W_norm=1.0):
    return PsiProfile(lambda t: 0.0 * t, W_norm, s, name="zero")


def odd_harmonic(coeffs, s=0.1, W_norm=1.0, name="harmonic"):
    """ψ = Σ c_k sin((4k+2)t)/(4k+2) with Σ c_k = 1, so ψ(0) = 0, ψ′(0) = 1, ψ′(π/4) = 0."""
    c = np.asarray(coeffs, float)
    c = c / c.sum()

    def psi(t):
        acc = 0.0 * t
        for k, ck in enumerate(c):
            m = 4 * k + 2
            acc = acc + (ck / m) * ad.sin(m * t)
        return acc

    return PsiProfile(psi, W_norm, s, name=name, meta={"coeffs": c.tolist()})


def random_admissible(rng, n_modes=4, spread=0.15, s=0.1, W_norm=1.0):
    """Random profile from :func:`odd_harmonic` with small higher modes."""
    c = np.concatenate([[1.0], rng.uniform(-spread, spread, size=n_modes - 1)])
    return odd_harmonic(c, s, W_norm, name="random")


NAMED = {"sin2": sin2, "poly4": poly4}


def named(name, s=0.1, W_norm=1.0):
    try:
        return NAMED[name](s=s, W_norm=W_norm)
    except KeyError:
        raise KeyError(f"unknown profile {name!r}") from None


def from_samples(t, psi, s=0.1, W_norm=1.0, name="sampled"):
    """Profile from sampled (t, ψ) via a cubic spline (derivatives from the spline)."""
    from scipy.interpolate import CubicSpline
    cs = CubicSpline(np.asarray(t, float), np.asarray(psi, float))

    def derivs(tt):
        return cs(tt), cs(tt, 1), cs(tt, 2)

    def psi_fn(tt):
        return cs(ad.value(tt))

    return PsiProfile(psi_fn, W_norm, s, derivs=derivs, interval=(float(t[0]), float(t[-1])), name=name)
