"""Verification scenarios shared by the CLI checks, the demos and the test-suite.

Each scenario returns plain numbers (residuals, measured values) so callers
decide tolerances.  ``rng`` is anything with numpy-Generator style
``uniform``/``normal`` methods.
"""

from __future__ import annotations

import numpy as np

from . import ad, compression as C, deform as D, fixtures as F, frames as Fr, planes as P
from . import profiles as Pr, submersion as S, torus as T
from .metric import TangentVector, check_geodesic_preservation, gram, riemann


# metric-core / cartan-frames -------------------------------------------------------------------

def cross_oracle(rng, n=20, names=None):
    """Worst Cartan-vs-Christoffel component gap per catalog fixture."""
    out = {}
    for name in names or list(F.CATALOG):
        g = F.metric(name)
        cf = Fr.gram_schmidt_frame(g)
        out[name] = max(Fr.cross_oracle_residual(cf, p) for p in g.chart.sample(rng, n))
    return out


def riemann_max(name, rng, n=5):
    g = F.metric(name)
    return max(float(np.abs(riemann(g, p).components).max()) for p in g.chart.sample(rng, n))


# submersion-geometry / fiber scaling ------------------------------------------------------------

def detlef(name, s, rng, n=3):
    """Worst residual of each canonical-variation identity over ``n`` random configurations."""
    sub = S.submersion(name)
    d = sub.total.dimension
    worst = {}
    for p in sub.total.chart.sample(rng, n):
        PH, PV = sub.projectors(p)
        v = lambda: np.asarray(rng.normal(size=d), float)
        X, Y, Z = PH @ v(), PH @ v(), PH @ v()
        U, V = PV @ v(), PV @ v()
        res = D.detlef_identities(sub, s, p, X, Y, Z, U, V, v()).as_dict()
        for k, val in res.items():
            worst[k] = max(worst.get(k, 0.0), float(val))
    return worst


HOPF_POINT = np.array([0.6, 1.0, 2.0])


def berger(s, p=HOPF_POINT):
    """(vertizontal, horizontal) sectional curvature of the scaled Hopf metric."""
    sub = S.submersion("hopf")
    X, Y = S.hopf_horizontal(p)
    return D.berger_sectionals(sub, s, p, X, Y, S.hopf_vertical(p))


def vertizontal_sec(s):
    return float(berger(s)[0])


def fiber_model_gap(s_values=(0.1, 0.3, 0.5), points=(0.4, 0.8, 1.2)):
    """|3-D fiber-scaled curv(∂r, ∂z) − 1-D model| on warped S²×S¹."""
    rows = T.full_pipeline_rows(s_values, points)
    return max(abs(r.fiber_only - r.fiber_model) for r in rows)


def remainder_ratios(s_values=(0.2, 0.1, 0.05)):
    """max over points of |full − s⁴ model|/s⁶ per s."""
    rows = T.full_pipeline_rows(s_values)
    return {s: max(r.scaled for r in rows if r.s == s) for s in s_values}


# torus pipeline -----------------------------------------------------------------------------------

def pos_int(s=0.1):
    res = T.integral_positivity(Pr.sin2(s=s))
    return {"residual": res.residual, "integral_curv": res.integral_curv,
            "expected": s ** 4 * np.pi / 8, "value_gap": abs(res.integral_curv - s ** 4 * np.pi / 8)}


def identities(rng, n=20):
    profs = [Pr.random_admissible(rng) for _ in range(n)]
    rows = [T.integral_identities(p) for p in profs]
    a, b = T.identity_coefficients(profs)
    return {"first": max(r.first for r in rows), "second": max(r.second for r in rows),
            "coef_first": a, "coef_second": b}


def ipp_synthesis(profile="sin2", margin=0.01, s=0.1):
    I = T.synthesize_Ipp(Pr.named(profile, s=s), margin=margin)
    c = I.meta["certificate"]
    return {"min_grid": c.min_grid, "min_shifted": c.min_shifted, "integral": abs(c.integral_Ipp),
            "margin": margin}


# Cheeger ---------------------------------------------------------------------------------------------

def cheeger_pairing(rng, n=100):
    """Worst |g∞(u,w) − g_l(u, C(w))| on warped ℝ³ under SO(3) with random l and vectors."""
    g, G = F.metric("warped_r3"), D.so3_space()
    worst = 0.0
    pts = g.chart.sample(rng, n, 0.3)
    for p in pts:
        l = float(rng.uniform(0.3, 3.0))
        ch = D.cheeger(g, G, l)
        u, w = np.asarray(rng.normal(size=3)), np.asarray(rng.normal(size=3))
        worst = max(worst, D.pairing_residual(ch, p, u, w))
    return worst


def cheeger_gauss(l):
    """Gauss curvature at the origin of the Cheeger-deformed plane under SO(2)."""
    ch = D.cheeger(F.metric("flat_r2"), D.so2_plane(), l)
    p = np.zeros(2)
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    return riemann(ch.metric, p).curv(e1, e2) / gram(ch.metric(p), e1, e2)


def cheeger_limit(l=1e6):
    g = F.metric("flat_r2")
    ch = D.cheeger(g, D.so2_plane(), l)
    q = np.array([0.5, -0.3])
    return float(np.abs(ch.metric(q) - g(q)).max())


WARPED_X = np.array([1.0, 0.0, 0.0])
WARPED_V = np.array([0.0, 1.0, 0.0])
WARPED_W = np.array([0.0, 0.0, 1.0])


def cheeger_principles(l_schedule=(0.5, 1.0, 2.0, 4.0, 8.0)):
    rows = D.cheeger_curvature_principles(F.metric("warped_r3"), D.so3_space(), WARPED_X, WARPED_V, WARPED_W,
                                          list(l_schedule))
    return rows


def cheeger_crossing():
    return D.cheeger_crossing(F.metric("warped_r3"), D.so3_space(), WARPED_X, WARPED_V, WARPED_W, 0.3, 20.0)


# compression -----------------------------------------------------------------------------------------

def compression_transcription(rng, n=1000):
    """Worst relative gap between the closed-form and numerical (ψ′, ψ″)."""
    w1 = w2 = 0.0
    for cfg, t in C.random_configs(rng, n):
        a = C.psi_derivatives(cfg, t)
        b = C.numerical_derivatives(cfg, t)
        w1 = max(w1, C.relative_error(a[0], b[0]))
        w2 = max(w2, C.relative_error(a[1], b[1]))
    return w1, w2


def compression_lower(rhos=(0.5, 1.0, 2.0), nus=(1e-3, 1e-4)):
    """(ρ, ν, min (ψ′)² on [0,ν], threshold 0.97/(ρ²+1)) rows."""
    rows = []
    for rho in rhos:
        for nu in nus:
            b = C.compression_bounds(C.CompressionConfig(rho=rho, nu=nu), nus=())
            rows.append((rho, nu, b.lower_min, b.lower_threshold))
    return rows


def compression_exponent(beta=0.5, rho=1.0):
    b = C.compression_bounds(C.CompressionConfig(rho=rho, beta=beta))
    return b.exponent_fit, b.exponent_expected


def ratio_estimate(nu=1e-3, rho=1.0):
    m, rows = C.peters_grid(C.CompressionConfig(rho=rho, nu=nu))
    return m, sum(r.skipped for r in rows)


def paraboloid(ls=(0.5, 1.0, 2.0)):
    return max(C.paraboloid_check(l) for l in ls)


# synergy -------------------------------------------------------------------------------------------

def qtau_brute(rng, n=100, points=100_001, window=2.0):
    """Worst |qtau_min − min over a τ grid| for triples whose minimizer lies in the window."""
    taus = np.linspace(-window, window, points)
    worst = 0.0
    for _ in range(n):
        cw = float(rng.uniform(-1.0, 1.0))
        cv = float(rng.uniform(0.5, 2.0))
        r = float(rng.uniform(-1.0, 1.0))
        brute = float(np.min(P.qtau(cw, r, cv, taus)))
        worst = max(worst, abs(P.qtau_min(cw, r, cv) - brute))
    return worst


def synergy(nu=1e-3, kappa=0.1, s=0.1, rho=1.0, scale=100.0):
    cfg = C.CompressionConfig(rho=rho, nu=nu)
    p = Pr.sin2(s=s)
    fpp, cert = T.synergy_redistribute(p, T.compression_rsquared(cfg, s, scale), 1.0, nu, kappa=kappa)
    return fpp, cert


# tangential / orthogonal pcc --------------------------------------------------------------------------

def tangential_t4(amplitude=0.3, perturbation=None):
    g = F.metric("flat_t4")
    Xd = D.coordinate_distribution(4, [0], "X")
    Ad = D.coordinate_distribution(4, [1], "A")
    Gd = D.coordinate_distribution(4, [2], "G")
    f = lambda x: amplitude * ad.sin(x[0])
    Xf = lambda x: np.array([1.0, 0.0, 0.0, 0.0])
    p = np.array([1.0, 2.0, 3.0, 4.0])
    W = np.array([0.2, 0.5, 1.0, -0.7])
    return D.tangential_report(g, Xd, Ad, Gd, f, Xf, p, W, sample_points=[p, p + 0.5], perturbation=perturbation)


def orthogonal_t3(eps=1e-2, width=np.pi, n=201):
    """Orthogonal pcc on flat T³ with O = span{∂3} and φ = 1 + ε·bump(x1)."""
    g = F.metric("flat_t3")
    O = D.coordinate_distribution(3, [2], "O")
    fs = lambda t: 1.0 + eps * D.bump(t, np.pi, width)
    r = lambda x: x[0]
    gt = D.orthogonal_pcc(g, O, r, fs)
    ts = np.linspace(np.pi - width, np.pi + width, n)
    pts = [np.array([t, 1.0, 2.0]) for t in ts]
    e1, e2 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    flats = [(q, e1, e2) for q in pts[::10]]
    rep = D.redistribution_report(g, gt, O, r, fs, lambda x: e1, pts, flats, eps)
    return g, gt, rep


def geodesic_preservation(eps=1e-2):
    """A g-geodesic along ∂1 stays a g̃-geodesic under the ∂1-fixing orthogonal pcc."""
    g, gt, _ = orthogonal_t3(eps, n=11)
    from .metric import geodesic_flow
    curve = geodesic_flow(g, TangentVector([0.5, 1.0, 2.0], [1.0, 0.0, 0.0]), 5.0, 200)
    return check_geodesic_preservation(g, gt, curve)
