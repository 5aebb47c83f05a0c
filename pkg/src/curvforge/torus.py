"""Single-torus positivity on a 1-D profile: fiber scaling, conformal correction, synergy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import HypothesisError, InfeasibleError, InvariantError
from .planes import qtau_min
from .profiles import QUARTER, PsiProfile, integrate

GRID = 1024


# fiber scaling --------------------------------------------------------------------------

def fiber_scaled_curv(p, t, s=None):
    """``curv_{g_s}(X,W) = −s²(ψψ′)′ + s⁴(ψ′)²``."""
    s = p.s if s is None else s
    v, d1, d2 = p.d(t)
    return -s * s * (d1 * d1 + v * d2) + s ** 4 * d1 * d1


@dataclass
class IntegralPositivity:
    integral_curv: float
    integral_a2: float   # s⁴∫(ψ′)²
    residual: float
    flags: list

    @property
    def positive(self):
        return self.integral_curv > 0 and self.integral_a2 > 0


def integral_positivity(p, c=None, s=None, panels=512, tol=1e-8):
    """Compare ∫_c curv_{g_s}(X,W) with s⁴∫_c (ψ′)²."""
    s = p.s if s is None else s
    a, b = c or p.interval
    lhs = integrate(lambda t: fiber_scaled_curv(p, t, s), a, b, p.breaks, panels)
    rhs = s ** 4 * integrate(lambda t: p.d(t)[1] ** 2, a, b, p.breaks, panels)
    flags = []
    v, d1, _ = p.d(np.array([a, b]))
    tt = np.linspace(a, b, 257)
    if np.abs(p.d(tt)[1]).max() < 1e-12:
        flags.append("vertizontal-degenerate")
    if abs(v[0]) > tol:
        flags.append("interval-does-not-start-at-zero")
    if abs(d1[1]) > tol:
        flags.append("interval-does-not-end-at-max")
    return IntegralPositivity(lhs, rhs, abs(lhs - rhs), flags)


# conformal correction -----------------------------------------------------------------------

def base_terms(p, t):
    """``(ψ′)² + (ψ²/|W|²)(ψ′)² + (ψ²/|W|²)(ψψ′)′``: combined curvature over s⁴ before I″."""
    v, d1, d2 = p.d(t)
    w2 = p.W_norm ** 2
    return d1 * d1 + v * v * d1 * d1 / w2 + v * v * (d1 * d1 + v * d2) / w2


@dataclass
class CorrectionI:
    """I″ on [a, b] with zero mean (so I′ vanishes at both ends)."""

    Ipp: object
    interval: tuple = (0.0, QUARTER)
    breaks: tuple = ()
    tol: float = 1e-10
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = self.mean_integral()
        if abs(m) > self.tol:
            raise InvariantError(f"∫I″ = {m:.3e} is not zero")

    def __call__(self, t):
        return np.broadcast_to(np.asarray(self.Ipp(np.asarray(t, float)), float), np.shape(t))

    def mean_integral(self):
        a, b = self.interval
        return integrate(lambda t: np.broadcast_to(np.asarray(self.Ipp(t), float), t.shape), a, b, self.breaks)

    def Ip(self, t):
        """I′(t) = ∫_a^t I″."""
        a, _ = self.interval
        return integrate(lambda u: np.broadcast_to(np.asarray(self.Ipp(u), float), u.shape), a, t,
                         [x for x in self.breaks if x < t])


def zero_correction(interval=(0.0, QUARTER)):
    return CorrectionI(lambda t: 0.0 * np.asarray(t), interval)


def combined_curv(p, I, t, s=None):
    """s⁴-model of e^{−2f}curv after fiber scaling and the conformal change."""
    s = p.s if s is None else s
    return s ** 4 * (base_terms(p, t) - I(t) * p.W_norm ** 2)


def integral_rewrite_residual(p):
    """∫combined (I″ = 0) vs s⁴∫[(ψ′)² − (ψ²/|W|²)(ψ′)²]."""
    a, b = p.interval
    I0 = zero_correction((a, b))
    lhs = integrate(lambda t: combined_curv(p, I0, t), a, b, p.breaks)
    rhs = p.s ** 4 * integrate(lambda t: p.d(t)[1] ** 2 * (1 - p.d(t)[0] ** 2 / p.W_norm ** 2), a, b, p.breaks)
    return lhs, rhs, abs(lhs - rhs)


@dataclass
class IdentityResiduals:
    first: float    # ∫ψ²(ψ′)² + ⅓∫ψ³ψ″
    second: float   # ∫ψ²(ψψ′)′ + 2∫ψ²(ψ′)²
    integrals: dict
    flags: list


def integral_identities(p, tol=1e-8):
    a, b = p.interval

    def q(kind):
        def f(t):
            v, d1, d2 = p.d(t)
            return {"A": v * v * d1 * d1, "B": v ** 3 * d2, "C": v * v * (d1 * d1 + v * d2)}[kind]
        return integrate(f, a, b, p.breaks)

    A, B, C = q("A"), q("B"), q("C")
    v, d1, _ = p.d(np.array([a, b]))
    flags = []
    if abs(v[0]) > tol:
        flags.append("psi-nonzero-at-start")
    if abs(d1[1]) > tol:
        flags.append("dpsi-nonzero-at-end")
    return IdentityResiduals(abs(A + B / 3), abs(C + 2 * A), {"psi2_dpsi2": A, "psi3_ddpsi": B, "psi2_dpsipsi": C},
                             flags)


def identity_coefficients(profiles):
    """Least-squares scalars a, b in ∫ψ²ψ′² = a∫ψ³ψ″ and ∫ψ²(ψψ′)′ = b∫ψ²ψ′²."""
    rows = [integral_identities(p).integrals for p in profiles]
    A = np.array([r["psi2_dpsi2"] for r in rows])
    B = np.array([r["psi3_ddpsi"] for r in rows])
    C = np.array([r["psi2_dpsipsi"] for r in rows])
    return float(A @ B / (B @ B)), float(C @ A / (A @ A))


# I″ synthesis --------------------------------------------------------------------------------

def _crossings(fn, a, b, n=4096):
    t = np.linspace(a, b, n + 1)
    v = fn(t)
    out = []
    for i in np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0):
        out.append(brentq(lambda x: float(fn(np.array([x]))[0]), t[i], t[i + 1], xtol=1e-15))
    out.extend(float(t[i]) for i in np.flatnonzero(v == 0))
    return sorted(out)


def _water_fill(r, a, b, base_breaks=()):
    """Constant c with ∫ min(r, c) = 0; returns (c, kink points)."""

    def mean_at(c):
        kinks = _crossings(lambda t: r(t) - c, a, b)
        return integrate(lambda t: np.minimum(r(t), c), a, b, list(base_breaks) + kinks)

    hi = float(np.max(r(np.linspace(a, b, 4097))))
    if mean_at(hi + 1.0) <= 0:
        return None, []
    lo = 0.0
    if mean_at(lo) >= 0:
        return 0.0, _crossings(r, a, b)
    c = brentq(mean_at, lo, hi + 1.0, xtol=1e-15, rtol=1e-15)
    return c, _crossings(lambda t: r(t) - c, a, b)


@dataclass
class SynthesisCertificate:
    margin: float
    min_grid: float
    min_shifted: float
    integral_Ipp: float
    level: float


def synthesize_Ipp(p, margin=0.01, extra=None, grid=GRID, boost_steps=8):
    """I″ with ∫I″ = 0 making combined_curv/s⁴ ≥ margin on the grid.

    ``extra(t)`` is subtracted from the base terms (used by the synergy step to
    fold in −R²/(s⁴ curv(X,V))).  I″ = min((base − extra − m)/|W|², c) with the
    level c fixed by the zero-mean condition.
    """
    a, b = p.interval
    w2 = p.W_norm ** 2

    def base(t):
        out = base_terms(p, t)
        return out - extra(t) if extra is not None else out

    mean_base = integrate(base, a, b, p.breaks) / (b - a)
    if margin >= mean_base:
        best = _max_feasible_margin(base, a, b, p.breaks, w2)
        raise InfeasibleError(f"margin {margin:g} exceeds the feasible bound {best:.6g}", best=best)
    tg = np.linspace(a, b, grid + 1)
    ts = tg[:-1] + 0.5 * (tg[1] - tg[0])
    for k in range(boost_steps):
        # aim slightly above the margin so rounding cannot push the certificate below it
        target = margin + (mean_base - margin) * 0.5 ** (boost_steps - k + 2)
        r = lambda t, target=target: (base(t) - target) / w2
        c, kinks = _water_fill(r, a, b, p.breaks)
        if c is None:
            continue
        fn = lambda t, r=r, c=c: np.minimum(r(t), c)
        I = CorrectionI(fn, (a, b), tuple(sorted(set(p.breaks) | set(kinks))),
                        meta={"level": c, "target": target})
        val = lambda t: base(t) - I(t) * w2
        mg, ms = float(val(tg).min()), float(val(ts).min())
        if mg >= margin and ms >= margin:
            cert = SynthesisCertificate(margin, mg, ms, I.mean_integral(), c)
            I.meta["certificate"] = cert
            return I
    best = _max_feasible_margin(base, a, b, p.breaks, w2)
    raise InfeasibleError(f"no I″ certifies margin {margin:g}", best=best)


def _max_feasible_margin(base, a, b, breaks, w2, iters=60):
    lo, hi = -10.0, 10.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        r = lambda t: (base(t) - mid) / w2
        if integrate(r, a, b, breaks) > 0:
            lo = mid
        else:
            hi = mid
    return lo


# abstract (1,3) tensors --------------------------------------------------------------------

@dataclass
class AbstractTensorRow:
    t: float
    psi: float
    jacobi_coeff: float       # multiplies W^H in R^{g_s}(W,X)X
    jacobi_a_coeff: float     # multiplies A_X W^H
    second_a_coeff: float     # multiplies A_{W^H} W^V in (R^{g_s}(X,W)W)^H
    second_hess_coeff: float  # multiplies ∇_X grad ψ
    jacobi_bound: float       # |R(W,X)X| bound from the supplied A estimate
    second_bound: float


def abstract_13_tensors(p, t, a_xwh=0.0, a_whwv=0.0, s=None, psi_floor=1e-3):
    """Coefficient table of the fiber-scaled (1,3) tensors at ``t``.

    ``a_xwh`` and ``a_whwv`` bound |A_X W^H| and |A_{W^H}W^V|; they depend on
    the concrete geometry.
    """
    s = p.s if s is None else s
    v, d1, d2 = (float(x[0]) for x in p.d(np.array([t])))
    if v <= psi_floor:
        raise HypothesisError(f"ψ({t}) = {v:.2e} is below the floor {psi_floor}")
    jc = -s * s * d2 / v
    ja = -s * s * d1 / v
    sa = -(1 - s * s) * s * s * d1 / v
    sh = -s * s * v
    return AbstractTensorRow(float(t), v, jc, ja, sa, sh, abs(jc) * v + abs(ja) * a_xwh,
                             abs(sa) * a_whwv + abs(sh) * abs(d2))


# synergy ----------------------------------------------------------------------------------------

def smooth_step(x):
    """C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1."""
    x = np.asarray(x, float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


@dataclass
class PhiRedistribution:
    """f″ = −A·h_neg + B·h_pos; the constructor enforces ∫f″ = 0 on the support."""

    amplitude: float
    balance: float
    neg_end: float
    pos_start: float
    support: tuple = (0.0, QUARTER)
    tol: float = 1e-10

    def __post_init__(self):
        m = self.integral()
        if abs(m) > self.tol:
            raise InvariantError(f"∫f″ = {m:.3e} is not zero")

    def h_neg(self, t):
        return _h_neg(t, self.neg_end)

    def h_pos(self, t):
        return _h_pos(t, self.pos_start, self.support[1])

    @property
    def breaks(self):
        return _redistribution_breaks(self.neg_end, self.pos_start, self.support[1])

    def __call__(self, t):
        return -self.amplitude * self.h_neg(t) + self.balance * self.h_pos(t)

    def integral(self):
        a, b = self.support
        return integrate(self, a, b, self.breaks)

    @classmethod
    def build(cls, amplitude, neg_end, pos_start, support=(0.0, QUARTER), tol=1e-10):
        """Balance chosen so the positive part pays for the negative part exactly."""
        a, b = support
        br = _redistribution_breaks(neg_end, pos_start, b)
        n_int = integrate(lambda t: _h_neg(t, neg_end), a, b, br)
        p_int = integrate(lambda t: _h_pos(t, pos_start, b), a, b, br)
        return cls(amplitude, amplitude * n_int / p_int, neg_end, pos_start, support, tol)


def _h_neg(t, neg_end):
    return smooth_step((neg_end - np.asarray(t, float)) / (0.5 * neg_end))


def _h_pos(t, pos_start, end):
    return smooth_step((np.asarray(t, float) - pos_start) / (0.1 * (end - pos_start)))


def _redistribution_breaks(neg_end, pos_start, end):
    return (0.5 * neg_end, neg_end, pos_start, pos_start + 0.1 * (end - pos_start))


def check_zero_mean(fpp, support, breaks=(), tol=1e-10):
    m = integrate(lambda t: np.broadcast_to(np.asarray(fpp(t), float), t.shape), *support, breaks)
    if abs(m) > tol:
        raise InvariantError(f"∫f″ = {m:.3e} is not zero")
    return m


@dataclass
class SynergyCertificate:
    kappa: float
    lhs: float          # ϰ ∫ curv(X,W)
    rhs: float          # ∫ R(W,X,X,V)² / curv(X,V)
    rhs_without: float  # same with f″ = 0
    integral_ok: bool
    qmin_min: float
    pointwise_ok: bool
    Ipp: object = None

    @property
    def holds(self):
        return self.integral_ok and self.pointwise_ok


def _graded_grid(a, b, nu, n=GRID):
    pieces = [np.linspace(a, min(b, 20 * nu), n + 1), np.linspace(min(b, 20 * nu), b, n + 1)]
    return np.unique(np.concatenate(pieces))


def synergy_redistribute(p, rSquared, curvXV0, nu, kappa=0.1, beta=0.5, c=10.0, margin_frac=1e-3,
                         amplitudes=None):
    """Pick f″ (negative near the pole, positive and small on [ν^β, π/4]) and certify Q(τ) > 0.

    ``rSquared(t)`` is R(W,X,X,V)² along the curve and ``curvXV0`` the baseline
    curv(X,V) before the redistribution (the change is curv − f″).
    """
    a, b = p.interval
    s4 = p.s ** 4
    base_c = curvXV0 if callable(curvXV0) else (lambda t, v=float(curvXV0): np.full(np.shape(t), v))
    breaks = tuple(sorted({*p.breaks, nu, 5 * nu, 20 * nu}))
    lhs_int = integrate(lambda t: s4 * base_terms(p, t), a, b, breaks)
    grid = _graded_grid(a, b, nu)
    r2max = float(np.max(rSquared(grid)))
    if r2max == 0.0:
        fpp = PhiRedistribution(0.0, 0.0, c * nu, nu ** beta, (a, b))  # f″ ≡ 0
        I = synthesize_Ipp(p, margin=margin_frac * lhs_int / (s4 * (b - a)))
        q = _qmin_profile(p, I, rSquared, base_c, fpp, grid)
        return fpp, SynergyCertificate(kappa, kappa * lhs_int, 0.0, 0.0, True, float(q.min()), bool(q.min() > 0), I)
    rhs0 = integrate(lambda t: rSquared(t) / base_c(t), a, b, breaks)
    probe = PhiRedistribution.build(1.0, c * nu, nu ** beta, (a, b))
    cmin = float(np.min(base_c(grid)))
    a_max = 0.95 * cmin / probe.balance  # keeps curv(X,V) − f″ > 0 on the positive part
    cands = amplitudes if amplitudes is not None else np.geomspace(cmin * 1e-2, a_max, 40)
    chosen, best_ratio = None, np.inf
    for A in cands:
        fpp = PhiRedistribution.build(float(A), c * nu, nu ** beta, (a, b))
        den = lambda t, f=fpp: base_c(t) - f(t)
        if np.min(den(grid)) <= 0:
            continue
        rhs = integrate(lambda t, d=den: rSquared(t) / d(t), a, b, breaks + fpp.breaks)
        ratio = rhs / lhs_int
        if ratio < best_ratio:
            best_ratio = ratio
        if kappa * lhs_int > rhs:
            chosen = (fpp, rhs)
            break
    if chosen is None:
        raise InfeasibleError(f"rSquared not compressed enough: best ratio {best_ratio:.4g} > ϰ = {kappa}",
                              best=best_ratio)
    fpp, rhs = chosen
    den = lambda t: base_c(t) - fpp(t)
    extra = lambda t: rSquared(t) / (s4 * den(t))
    sub = PsiProfile(p.psi, p.W_norm, p.s, p.phi_inf, p.derivs, p.interval,
                     tuple(sorted(set(breaks) | set(fpp.breaks))), p.name)
    mean_rest = integrate(lambda t: base_terms(sub, t) - extra(t), a, b, sub.breaks) / (b - a)
    I = synthesize_Ipp(sub, margin=margin_frac * mean_rest, extra=extra)
    q = _qmin_profile(sub, I, rSquared, base_c, fpp, grid)
    shifted = 0.5 * (grid[1:] + grid[:-1])
    q2 = _qmin_profile(sub, I, rSquared, base_c, fpp, shifted)
    qmin = float(min(q.min(), q2.min()))
    return fpp, SynergyCertificate(kappa, kappa * lhs_int, rhs, rhs0, True, qmin, qmin > 0, I)


def _qmin_profile(p, I, rSquared, base_c, fpp, t):
    comb = combined_curv(p, I, t)
    r = np.sqrt(rSquared(t))
    den = base_c(t) - fpp(t)
    return np.array([qtau_min(cw, rr, dd) for cw, rr, dd in zip(comb, r, den)])


def compression_profile(cfg, s=0.1, W_norm=1.0):
    """PsiProfile for ψ_{ν,l} with the closed-form derivatives."""
    from .compression import psi_derivatives, psi_nu_l

    def derivs(t):
        t = np.atleast_1d(np.asarray(t, float))
        v = np.array([psi_nu_l(cfg, x) for x in t])
        d = np.array([psi_derivatives(cfg, x) for x in t])
        return v, d[:, 0], d[:, 1]

    return PsiProfile(lambda t: psi_nu_l(cfg, t), W_norm, s, derivs=derivs,
                      breaks=(cfg.nu, 5 * cfg.nu, 20 * cfg.nu), name=f"psi_nu_l(nu={cfg.nu:g})")


def compression_rsquared(cfg, s=0.1, scale=100.0, curvXV0=1.0):
    """R(W,X,X,V)² model ``scale·curvXV0·s⁴(ψ′_{ν,l})²``: concentrated on [0, O(ν)]."""
    from .compression import psi_derivatives_grid

    def r2(t):
        d1, _ = psi_derivatives_grid(cfg, np.atleast_1d(t))
        return scale * curvXV0 * s ** 4 * d1 * d1

    return r2


# 3-D check on the warped S²×S¹ fixture ----------------------------------------------------------

def warped_profile(s=0.1):
    """ψ = |∂_z^H| = sin r/√(1 + sin²r) for the warped_s2 submersion (zero at 0, max at π/2)."""
    from . import ad

    def psi(t):
        sn = ad.sin(t)
        return sn / ad.sqrt(1.0 + sn * sn)

    return PsiProfile(psi, 1.0, s, interval=(0.0, np.pi / 2), name="warped_s2")


@dataclass
class RemainderRow:
    s: float
    t: float
    full: float        # e^{−2f} curv(∂r, ∂z) of the deformed 3-D metric
    model: float       # combined_curv: the s⁴ model
    scaled: float      # |full − model| / s⁶
    fiber_only: float  # curv after fiber scaling alone
    fiber_model: float


def full_pipeline_rows(s_values=(0.2, 0.1, 0.05), points=(0.4, 0.8, 1.2), I=None):
    """Fiber scaling then e^{2f} with f = −s²ψ²/(2(1−s²)|W|²) + s⁴I(r) on S²×S¹ → S².

    ``I`` is a polymorphic function of r (default ``0.05·cos 2r``, whose I″
    has zero mean on [0, π/2]); the model uses its exact second derivative.
    """
    from . import ad
    from .deform import conformal, fiber_scale
    from .metric import curv
    from .profiles import derivs_1d
    from .submersion import submersion

    sub = submersion("warped_s2")
    I = I or (lambda r: 0.05 * ad.cos(2.0 * r))
    rows = []
    for s in s_values:
        prof = warped_profile(s)
        gs = fiber_scale(sub, s)

        def f(x, s=s):
            sn = ad.sin(x[0])
            psi2 = sn * sn / (1.0 + sn * sn)
            return -s * s / (2.0 * (1.0 - s * s)) * psi2 + s ** 4 * I(x[0])

        g = conformal(gs, f)
        corr = CorrectionI(lambda t: derivs_1d(I, t)[2], prof.interval)
        for r in points:
            p = np.array([r, 1.0, 0.5])
            X, W = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
            fv = float(ad.value(f(p)))
            full = np.exp(-2.0 * fv) * curv(g, p, X, W)
            model = float(combined_curv(prof, corr, np.array([r]))[0])
            fo = curv(gs, p, X, W)
            fm = float(fiber_scaled_curv(prof, np.array([r]))[0])
            rows.append(RemainderRow(s, r, float(full), model, abs(float(full) - model) / s ** 6, float(fo), fm))
    return rows
