"""Curvature compression of ψ_{ν,l} = |W^H| under the two-stage Cheeger metric g_{ν,l}."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import ad
from .errors import HypothesisError
from .profiles import QUARTER, derivs_1d

ASSERT_NU = 1e-2   # bounds are asserted only below this ν; above it they are reported


def _sin2(t):
    return 0.5 * ad.sin(2.0 * t)


@dataclass(frozen=True)
class CompressionConfig:
    """ρ = 1/|K¹_W|_bi, ν, l, β and the profiles ψ∞, φ∞.

    ``phi_inf = None`` means φ∞ = ψ∞.  ``ratio`` may supply φ∞/ψ∞ directly
    (needed when both vanish at 0 and the quotient is known in closed form).
    ``l = None`` ties l to ν by ``l = ν^{l_power}``.
    """

    rho: float = 1.0
    nu: float = 1e-3
    l: float | None = None
    beta: float = 0.5
    psi_inf: object = _sin2
    phi_inf: object = None
    ratio: object = None
    C1: float | None = None
    slack: float = 0.1
    l_power: float = 1.0 / 3.0
    zero_phi: bool = False
    name: str = "sin2"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def l_value(self):
        return self.l if self.l is not None else self.nu ** self.l_power

    def with_nu(self, nu):
        return replace(self, nu=nu)

    def phi(self, t):
        if self.zero_phi:
            return 0.0 * t
        return (self.phi_inf or self.psi_inf)(t)

    def q(self, t):
        """φ∞/ψ∞ with the limit value at zeros of ψ∞."""
        if self.zero_phi:
            return 0.0 * t
        if self.ratio is not None:
            return self.ratio(t)
        if self.phi_inf is None:
            return 0.0 * t + 1.0
        if isinstance(t, ad.Jet) or np.iscomplexobj(t) or type(t).__module__.startswith("mpmath"):
            return self.phi(t) / self.psi_inf(t)
        t = np.asarray(t, float)
        p = np.asarray(self.psi_inf(t), float)
        small = np.abs(p) < 1e-300
        if not np.any(small):
            return np.asarray(self.phi(t), float) / p
        _, dphi, _ = derivs_1d(self.phi, t)
        _, dpsi, _ = derivs_1d(self.psi_inf, t)
        safe = np.where(small, 1.0, p)
        return np.where(small, dphi / dpsi, np.asarray(self.phi(t), float) / safe)

    def hypotheses(self, n=1024):
        """Residuals of the standing hypotheses on the profile (grid based)."""
        t = np.linspace(0.0, QUARTER, n + 1)
        p, dp, ddp = derivs_1d(self.psi_inf, t)
        f, df, _ = derivs_1d(self.phi, t)
        q, dq, _ = derivs_1d(self.q, t[1:])
        return {"psi_at_zero": abs(float(p[0])), "ddpsi_at_zero": abs(float(ddp[0])),
                "dpsi_at_zero_minus_1": abs(float(dp[0]) - 1.0),
                "dphi_at_zero_minus_1": 0.0 if self.zero_phi else abs(float(df[0]) - 1.0),
                "ddpsi_positive_part": float(max(0.0, ddp.max())),
                "ratio_sup": float(np.abs(q).max()), "ratio_prime_sup": float(np.abs(dq).max())}


def psi_nu_l(cfg, t):
    """ψ_{ν,l}(t) = ψ∞/D with D² = ρ²ψ∞²/ν² + φ∞⁴/(l²ψ∞²) + 1; 0 where ψ∞ = 0.

    Polymorphic in ``t`` (float, array or jet away from zeros of ψ∞).
    """
    p = cfg.psi_inf(t)
    f = cfg.phi(t)
    q = cfg.q(t)
    nu, l, rho = cfg.nu, cfg.l_value, cfg.rho
    # φ⁴/ψ² written as φ²q² so the quotient stays finite at ψ∞ = 0
    D2 = rho * rho * p * p / (nu * nu) + f * f * q * q / (l * l) + 1.0
    return p / ad.sqrt(D2)


def psi_derivatives(cfg, t):
    """(ψ′_{ν,l}, ψ″_{ν,l}) from the closed-form formal derivatives (scalar ``t``)."""
    d1, d2 = psi_derivatives_grid(cfg, np.array([float(t)]))
    return float(d1[0]), float(d2[0])


def psi_derivatives_grid(cfg, t):
    """Vectorized :func:`psi_derivatives`."""
    t = np.atleast_1d(np.asarray(t, float))
    p, dp, ddp = derivs_1d(cfg.psi_inf, t)
    f, df, _ = derivs_1d(cfg.phi, t)
    _, dq, ddq = derivs_1d(cfg.q, t)
    zero = p == 0.0
    ps = np.where(zero, 1.0, p)
    l2 = cfg.l_value ** 2
    psi = np.asarray(psi_nu_l(cfg, t), float)
    r = psi / ps
    N = dp - 2.0 * f ** 3 / l2 * dq
    M = ddp - 6.0 * f * f * df / l2 * dq - 2.0 * f ** 3 / l2 * ddq
    d1 = N * r ** 3
    d2 = M * r ** 3 - 3.0 * (dp / ps) * N * r ** 3 + 3.0 * N * N * psi ** 5 / ps ** 6
    # D = 1 + O(t²) at a zero of ψ∞, so the first two derivatives agree with ψ∞ there
    return np.where(zero, dp, d1), np.where(zero, ddp, d2)


def numerical_derivatives(cfg, t, h=None, method="mp", dps=40):
    """Numerical (ψ′, ψ″) of :func:`psi_nu_l`: the transcription oracle.

    ``method="mp"`` (default) differentiates ψ_{ν,l} by finite differences in
    ``dps``-digit arithmetic.  Where ψ_{ν,l} plateaus, ψ′ is a difference of
    terms about 10⁶ times larger, so double-precision routes lose digits:
    ``"complex"`` (complex-step ψ′, Richardson-extrapolated central difference
    for ψ″) and ``"fd"`` (real five-point stencils) are kept for comparison.
    """
    t = float(t)
    if method == "mp":
        import mpmath
        with mpmath.workdps(dps):
            f = lambda x: psi_nu_l(cfg, x)
            x = mpmath.mpf(t)
            return float(mpmath.diff(f, x, 1)), float(mpmath.diff(f, x, 2))
    if h is None:
        h = max(1e-2 * min(t, cfg.l_value, QUARTER), 1e-9)
    if method == "fd":
        f = lambda x: float(psi_nu_l(cfg, x))
        fm2, fm1, f0, fp1, fp2 = f(t - 2 * h), f(t - h), f(t), f(t + h), f(t + 2 * h)
        d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
        d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
        return d1, d2
    if method != "complex":
        raise ValueError(f"unknown method {method!r}")
    step = 1e-30

    def d(x):
        return float(np.imag(psi_nu_l(cfg, np.complex128(x + 1j * step)))) / step

    def stencil(h):
        return (d(t - 2 * h) - 8 * d(t - h) + 8 * d(t + h) - d(t + 2 * h)) / (12 * h)

    # one Richardson step cancels the h⁴ term of the five-point stencil
    return d(t), (64.0 * stencil(0.5 * h) - stencil(h)) / 63.0


def relative_error(a, b, floor=1e-12):
    return abs(a - b) / max(abs(b), floor)


def random_configs(rng, n):
    """Random (cfg, t) pairs with ν ∈ [1e-3, 1e-1], ρ ∈ [0.5, 2], t ∈ (0, π/4)."""
    out = []
    for _ in range(n):
        nu = float(10 ** rng.uniform(-3, -1))
        rho = float(rng.uniform(0.5, 2.0))
        a = float(rng.uniform(-0.3, 0.3))
        # φ∞ = sin(2t)/2 + a·sin(2t)²/4 keeps φ∞′(0) = 1 and φ∞/ψ∞ = 1 + a·sin(2t)/2
        phi = lambda t, a=a: 0.5 * ad.sin(2.0 * t) + 0.25 * a * ad.sin(2.0 * t) ** 2
        ratio = lambda t, a=a: 1.0 + 0.5 * a * ad.sin(2.0 * t)
        cfg = CompressionConfig(rho=rho, nu=nu, phi_inf=phi, ratio=ratio, name="random")
        t = float(rng.uniform(0.02 * nu, QUARTER - 1e-3))
        out.append((cfg, t))
    return out


# bounds ---------------------------------------------------------------------------------------

@dataclass
class CompressionBounds:
    lower_min: float | None         # min (ψ′)² on [0, ν]
    lower_threshold: float          # (97/100)/(ρ² + 1)
    lower_margin: float | None
    lower_argmin: float | None
    exponent_expected: float        # 14/3 − 6β
    exponent_fit: float | None
    fit_constant: float | None
    sweep: list                     # (ν, sup (ψ′)² on [ν^β, π/4], argmax)
    skipped: list

    @property
    def lower_holds(self):
        return self.lower_margin is not None and self.lower_margin >= 0

    def exponent_within(self, tol=0.2):
        return self.exponent_fit is not None and abs(self.exponent_fit - self.exponent_expected) <= tol

    def exponent_at_least(self, tol=0.2):
        return self.exponent_fit is not None and self.exponent_fit >= self.exponent_expected - tol


def _upper_grid(a, b, n):
    return np.unique(np.concatenate([a + (b - a) * np.geomspace(1e-9, 1.0, n) , np.linspace(a, b, n)]))


def compression_bounds(cfg, nus=(1e-2, 1e-3, 1e-4), n=1024):
    skipped = []
    thr = 0.97 / (cfg.rho ** 2 + 1.0)
    lower_min = lower_margin = argmin = None
    if cfg.nu <= ASSERT_NU:
        t = np.linspace(0.0, cfg.nu, n + 1)
        d1, _ = psi_derivatives_grid(cfg, t)
        sq = d1 * d1
        i = int(np.argmin(sq))
        lower_min, argmin = float(sq[i]), float(t[i])
        lower_margin = lower_min - thr
    else:
        skipped.append(f"lower bound: nu = {cfg.nu:g} above {ASSERT_NU:g}, vacuous")
    sweep = []
    for nu in nus:
        c = cfg.with_nu(nu)
        a = nu ** cfg.beta
        if a >= QUARTER:
            skipped.append(f"upper bound: nu^beta = {a:g} outside [0, pi/4]")
            continue
        t = _upper_grid(a, QUARTER, n)
        d1, _ = psi_derivatives_grid(c, t)
        sq = d1 * d1
        i = int(np.argmax(sq))
        sweep.append((float(nu), float(sq[i]), float(t[i])))
    expected = 14.0 / 3.0 - 6.0 * cfg.beta
    fit = const = None
    if len(sweep) >= 2 and all(row[1] > 0 for row in sweep):
        x = np.log([row[0] for row in sweep])
        y = np.log([row[1] for row in sweep])
        fit = float(np.polyfit(x, y, 1)[0])
        const = float(max(row[1] / row[0] ** expected for row in sweep))
    elif sweep:
        skipped.append("upper bound: sweep too short or sup vanishes, no fit")
    return CompressionBounds(lower_min, thr, lower_margin, argmin, expected, fit, const, sweep, skipped)


def lower_bound_profile(cfg, n=1024):
    """(t, (ψ′)², (ψ′∞)²/D⁶-free model 1/(ρ²t²/ν² + 1)) on [0, ν] for diagnosis."""
    t = np.linspace(0.0, cfg.nu, n + 1)
    d1, _ = psi_derivatives_grid(cfg, t)
    model = 1.0 / (cfg.rho ** 2 * t * t / cfg.nu ** 2 + 1.0)
    return t, d1 * d1, model


# second-derivative sign and the ratio estimate ---------------------------------------------

def sign_threshold(cfg):
    return cfg.nu / (np.sqrt(3.0) * cfg.rho) + cfg.slack * cfg.nu


def second_derivative_value(cfg, t):
    """−(ψ_{ν,l}ψ′_{ν,l})′ = −((ψ′)² + ψψ″)."""
    d1, d2 = psi_derivatives(cfg, t)
    return -(d1 * d1 + float(psi_nu_l(cfg, float(t))) * d2)


def check_c1(cfg, n=1024):
    """Largest C₁ with −ψ∞ψ∞″ ≥ C₁ψ∞² on (0, π/4]; raise if cfg.C1 exceeds it."""
    t = np.linspace(0.0, QUARTER, n + 1)[1:]
    p, _, ddp = derivs_1d(cfg.psi_inf, t)
    best = float(np.min(-ddp / p))
    if cfg.C1 is not None and cfg.C1 > best + 1e-12:
        raise HypothesisError(f"C1 = {cfg.C1} exceeds the profile bound {best:.6g}", residual=cfg.C1 - best)
    return best


def second_derivative_sign(cfg, t):
    """True when −(ψψ′)′ > 0 at ``t``."""
    return bool(second_derivative_value(cfg, t) > 0)


@dataclass
class SignReport:
    threshold: float
    asserted: bool
    min_above: float
    argmin_above: float
    below: list          # (t, value) below the threshold, report only
    c1_bound: float


def second_derivative_report(cfg, n=1024):
    c1 = check_c1(cfg)
    thr = sign_threshold(cfg)
    t_hi = _upper_grid(min(thr, QUARTER), QUARTER, n)
    vals = np.array([second_derivative_value(cfg, x) for x in t_hi])
    i = int(np.argmin(vals))
    t_lo = np.linspace(0.0, min(thr, QUARTER), 17)[:-1]
    below = [(float(x), second_derivative_value(cfg, x)) for x in t_lo]
    return SignReport(thr, cfg.nu <= ASSERT_NU, float(vals[i]), float(t_hi[i]), below, c1)


@dataclass
class RatioRow:
    t: float
    lhs: float
    rhs: float
    margin: float
    skipped: bool = False


def peters_estimate(cfg, t):
    """|ψ/ψ″·(ψψ′)′| against max{ψ², ν²/(3ρ²)}."""
    t = float(t)
    psi = float(psi_nu_l(cfg, t))
    d1, d2 = psi_derivatives(cfg, t)
    rhs = max(psi * psi, cfg.nu ** 2 / (3.0 * cfg.rho ** 2))
    if abs(d2) <= 1e-12:
        return RatioRow(t, float("nan"), rhs, float("nan"), True)
    lhs = abs(psi / d2 * (d1 * d1 + psi * d2))
    return RatioRow(t, lhs, rhs, rhs - lhs)


def peters_grid(cfg, n=1024):
    """Ratio estimate |(ψ/ψ″)(ψψ′)′| ≤ max(ψ², ν²/3ρ²) on a grid of (0, π/4] graded towards 0.

    Returns (min margin, rows).
    """
    t = _upper_grid(0.0, QUARTER, n)[1:]
    rows = [peters_estimate(cfg, x) for x in t]
    live = [r.margin for r in rows if not r.skipped]
    return (min(live) if live else float("nan")), rows


# cross-module consistency ----------------------------------------------------------------------

def paraboloid_check(l, radii=(0.1, 0.5, 1.0, 2.0, 5.0)):
    """|∂_θ| under the Cheeger deformation of ℝ²/SO(2) vs psi_nu_l with ψ∞ = r, φ∞ ≡ 0, ρ = 1, ν = l."""
    from .deform import cheeger, so2_plane
    from .fixtures import metric

    ch = cheeger(metric("flat_r2"), so2_plane(), [l])
    cfg = CompressionConfig(rho=1.0, nu=l, l=l, psi_inf=lambda r: 1.0 * r, zero_phi=True, name="radial")
    worst = 0.0
    for r in radii:
        p = np.array([r, 0.0])
        K = np.asarray(so2_plane().killing_at(p), float)[:, 0]
        g = np.asarray(ch.metric(p), float)
        worst = max(worst, abs(np.sqrt(K @ g @ K) - float(psi_nu_l(cfg, r))))
    return worst
