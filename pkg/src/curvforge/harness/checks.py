"""Named verification checks.  Each returns a list of :class:`Record`."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import ad, suites
from .config import ConfigError


@dataclass(frozen=True)
class Record:
    check: str
    location: str
    measured: float
    expected: float
    tolerance: float
    relation: str = "abs"   # abs: |m − e| ≤ tol; le: m ≤ e + tol; ge: m ≥ e − tol (strict when tol = 0)

    @property
    def margin(self):
        m, e, t = self.measured, self.expected, self.tolerance
        if m is None or not math.isfinite(m):
            return -math.inf
        if self.relation == "abs":
            return t - abs(m - e)
        if self.relation == "le":
            return e + t - m
        return m - (e - t)

    @property
    def passed(self):
        return self.margin >= 0 if self.tolerance > 0 else self.margin > 0

    def as_dict(self):
        return {"check": self.check, "location": self.location, "measured": self.measured,
                "expected": self.expected, "tolerance": self.tolerance, "relation": self.relation,
                "pass": bool(self.passed)}


@dataclass
class Context:
    fixture: str
    metric: object
    sub: object
    steps: dict
    rng: object
    grids: dict
    params: dict
    tolerance: float
    scale: float = 1.0

    def param(self, key, default):
        return self.params.get(key, self.steps.get(key, default))


def _fmt(x):
    return format(float(x), ".6g")


def _need_metric(ctx, check):
    if ctx.metric is None:
        raise ConfigError(f"check {check!r} needs a metric fixture")
    return ctx.metric


def _need_sub(ctx, check):
    if ctx.sub is None:
        raise ConfigError(f"check {check!r} needs a submersion fixture")
    return ctx.sub


# metric-level checks -------------------------------------------------------------------------

def riemann_zero(ctx):
    g = _need_metric(ctx, "riemann_zero")
    from ..metric import riemann
    n = int(ctx.grids.get("points", 5))
    out = []
    for i, p in enumerate(g.chart.sample(ctx.rng, n)):
        out.append(Record("riemann_zero", f"{ctx.fixture}#{i}", float(np.abs(riemann(g, p).components).max()),
                          0.0, ctx.tolerance))
    return out


def cross_oracle(ctx):
    n = int(ctx.param("points", ctx.grids.get("points", 20)))
    if ctx.params.get("all_fixtures", ctx.metric is None):
        res = suites.cross_oracle(ctx.rng, n)
    else:
        from .. import frames
        g = ctx.metric
        cf = frames.gram_schmidt_frame(g)
        res = {ctx.fixture: max(frames.cross_oracle_residual(cf, p) for p in g.chart.sample(ctx.rng, n))}
    return [Record("cross_oracle", k, v, 0.0, ctx.tolerance) for k, v in res.items()]


def detlef_equations(ctx):
    _need_sub(ctx, "detlef_equations")
    s = float(ctx.param("s", 0.3))
    res = suites.detlef(ctx.fixture, s, ctx.rng, int(ctx.param("points", 3)))
    return [Record("detlef_equations", f"{ctx.fixture} s={_fmt(s)} {k}", v, 0.0, ctx.tolerance)
            for k, v in res.items()]


def berger_sectionals(ctx):
    s = float(ctx.param("s", 0.3))
    vz, hz = suites.berger(s)
    return [Record("berger_sectionals", f"vertizontal s={_fmt(s)}", float(vz), 1 - s * s, ctx.tolerance),
            Record("berger_sectionals", f"horizontal s={_fmt(s)}", float(hz), 1 + 3 * s * s, ctx.tolerance)]


def vertizontal_sec(ctx):
    s = float(ctx.param("s", 0.3))
    return [Record("vertizontal_sec", f"s={_fmt(s)}", suites.vertizontal_sec(s), 1 - s * s, ctx.tolerance)]


def fiber_model(ctx):
    return [Record("fiber_model", "warped_s2", suites.fiber_model_gap(), 0.0, ctx.tolerance)]


def remainder_s6(ctx):
    bound = float(ctx.params.get("bound", 1.0))
    return [Record("remainder_s6", f"s={_fmt(s)}", v, bound, ctx.tolerance, "le")
            for s, v in suites.remainder_ratios().items()]


# torus pipeline --------------------------------------------------------------------------------

def pos_int(ctx):
    s = float(ctx.param("s", 0.1))
    r = suites.pos_int(s)
    return [Record("pos_int", f"residual s={_fmt(s)}", r["residual"], 0.0, ctx.tolerance),
            Record("pos_int", f"value s={_fmt(s)}", r["integral_curv"], r["expected"], ctx.tolerance)]


def integral_identities(ctx):
    r = suites.identities(ctx.rng, int(ctx.param("profiles", 20)))
    coef_tol = float(ctx.params.get("coefficient_tolerance", 1e-6)) * ctx.scale
    return [Record("integral_identities", "first", r["first"], 0.0, ctx.tolerance),
            Record("integral_identities", "second", r["second"], 0.0, ctx.tolerance),
            Record("integral_identities", "coefficient first", r["coef_first"], -1 / 3, coef_tol),
            Record("integral_identities", "coefficient second", r["coef_second"], -2.0, coef_tol)]


def ipp_synthesis(ctx):
    margin = float(ctx.param("margin", 0.01))
    r = suites.ipp_synthesis(str(ctx.params.get("profile", "sin2")), margin, float(ctx.param("s", 0.1)))
    return [Record("ipp_synthesis", "min grid", r["min_grid"], margin, 0.0, "ge"),
            Record("ipp_synthesis", "min shifted grid", r["min_shifted"], margin, 0.0, "ge"),
            Record("ipp_synthesis", "integral", r["integral"], 0.0, ctx.tolerance)]


# Cheeger ---------------------------------------------------------------------------------------

def cheeger_pairing(ctx):
    return [Record("cheeger_pairing", "warped_r3 SO(3)",
                   suites.cheeger_pairing(ctx.rng, int(ctx.param("pairs", 100))), 0.0, ctx.tolerance)]


def cheeger_gauss(ctx):
    ls = ctx.params.get("ls", [float(ctx.steps.get("l", 1.0))] if "l" in ctx.steps else [0.5, 1.0, 2.0])
    return [Record("cheeger_gauss", f"l={_fmt(l)}", float(suites.cheeger_gauss(float(l))), 3.0 / float(l) ** 2,
                   ctx.tolerance) for l in ls]


def cheeger_limit(ctx):
    l = float(ctx.params.get("l", 1e6))
    return [Record("cheeger_limit", f"l={_fmt(l)}", suites.cheeger_limit(l), 0.0, ctx.tolerance)]


def cheeger_principles(ctx):
    ls = ctx.params.get("ls", [0.5, 1.0, 2.0, 4.0, 8.0])
    return [Record("cheeger_principles", f"l={_fmt(r.l)}", float(r.margin), 0.0, ctx.tolerance, "ge")
            for r in suites.cheeger_principles(ls)]


def cheeger_crossing(ctx):
    l_curv, l_bound = suites.cheeger_crossing()
    found = 1.0 if (l_curv is not None and math.isfinite(l_curv)) else 0.0
    out = [Record("cheeger_crossing", "threshold found", found, 0.0, 0.0, "ge")]
    if found:
        out.append(Record("cheeger_crossing", "l at curv = 0", float(l_curv), 0.0, 0.0, "ge"))
    return out


# compression -------------------------------------------------------------------------------------

def compression_transcription(ctx):
    w1, w2 = suites.compression_transcription(ctx.rng, int(ctx.param("samples", 1000)))
    return [Record("compression_transcription", "first derivative", w1, 0.0, ctx.tolerance),
            Record("compression_transcription", "second derivative", w2, 0.0, ctx.tolerance)]


def compression_lower(ctx):
    rows = suites.compression_lower(tuple(ctx.params.get("rhos", (0.5, 1.0, 2.0))),
                                    tuple(ctx.params.get("nus", (1e-3,))))
    return [Record("compression_lower", f"rho={_fmt(rho)} nu={_fmt(nu)}", m, thr, 0.0, "ge")
            for rho, nu, m, thr in rows]


def compression_exponent(ctx):
    beta = float(ctx.param("beta", 0.5))
    fit, expected = suites.compression_exponent(beta)
    return [Record("compression_exponent", f"beta={_fmt(beta)}", fit, expected, ctx.tolerance)]


def peters_estimate(ctx):
    nu = float(ctx.param("nu", 1e-3))
    m, _ = suites.ratio_estimate(nu, float(ctx.param("rho", 1.0)))
    return [Record("peters_estimate", f"nu={_fmt(nu)}", m, 0.0, ctx.tolerance, "ge")]


def paraboloid(ctx):
    return [Record("paraboloid", "R2/SO(2)", suites.paraboloid(), 0.0, ctx.tolerance)]


# synergy ------------------------------------------------------------------------------------------

def qtau_brute(ctx):
    return [Record("qtau_brute", "100 triples", suites.qtau_brute(ctx.rng, int(ctx.param("triples", 100))), 0.0,
                   ctx.tolerance)]


def synergy(ctx):
    nu = float(ctx.param("nu", 1e-3))
    kappa = float(ctx.param("kappa", 0.1))
    _, cert = suites.synergy(nu, kappa)
    return [Record("synergy", f"integral nu={_fmt(nu)}", cert.lhs - cert.rhs, 0.0, 0.0, "ge"),
            Record("synergy", f"pointwise qmin nu={_fmt(nu)}", cert.qmin_min, 0.0, 0.0, "ge")]


# partial conformal changes ------------------------------------------------------------------------

def tangential_t4(ctx):
    amp = float(ctx.param("amplitude", 0.3))
    rep = suites.tangential_t4(amp)
    return [Record("tangential_t4", "curv equality", rep.equality_residual, 0.0, ctx.tolerance),
            Record("tangential_t4", "omega", rep.omega_residual, 0.0, 0.1 * ctx.tolerance)]


def orthogonal_pcc(ctx):
    eps = float(ctx.param("eps", 1e-2))
    _, _, rep = suites.orthogonal_t3(eps)
    return [Record("orthogonal_pcc", f"delta vs -phi'' eps={_fmt(eps)}", float(np.abs(rep.residual).max()), 0.0,
                   ctx.tolerance),
            Record("orthogonal_pcc", "flat planes", rep.flat_violation, 0.0, 1e-8),
            Record("orthogonal_pcc", "integral along curve", rep.integral_measured, 0.0, 1e-4)]


def geodesic_preservation(ctx):
    rep = suites.geodesic_preservation(float(ctx.param("eps", 1e-2)))
    return [Record("geodesic_preservation", "T3 orthogonal pcc", rep.residual, 0.0, ctx.tolerance)]


def min_sectional(ctx):
    g = _need_metric(ctx, "min_sectional")
    from ..planes import min_sectional as ms
    expected = float(ctx.params.get("expected", 0.0))
    n = int(ctx.grids.get("points", 3))
    return [Record("min_sectional", f"{ctx.fixture}#{i}", float(ms(g, p)), expected, ctx.tolerance)
            for i, p in enumerate(g.chart.sample(ctx.rng, n))]


CHECKS = {
    "riemann_zero": (riemann_zero, 1e-9),
    "cross_oracle": (cross_oracle, 1e-6),
    "detlef_equations": (detlef_equations, 1e-6),
    "berger_sectionals": (berger_sectionals, 1e-6),
    "vertizontal_sec": (vertizontal_sec, 1e-6),
    "fiber_model": (fiber_model, 1e-5),
    "remainder_s6": (remainder_s6, 0.0),
    "pos_int": (pos_int, 1e-10),
    "integral_identities": (integral_identities, 1e-8),
    "ipp_synthesis": (ipp_synthesis, 1e-10),
    "cheeger_pairing": (cheeger_pairing, 1e-8),
    "cheeger_gauss": (cheeger_gauss, 1e-5),
    "cheeger_limit": (cheeger_limit, 1e-9),
    "cheeger_principles": (cheeger_principles, 1e-6),
    "cheeger_crossing": (cheeger_crossing, 0.0),
    "compression_transcription": (compression_transcription, 1e-6),
    "compression_lower": (compression_lower, 0.0),
    "compression_exponent": (compression_exponent, 0.2),
    "peters_estimate": (peters_estimate, 1e-8),
    "paraboloid": (paraboloid, 1e-6),
    "qtau_brute": (qtau_brute, 1e-9),
    "synergy": (synergy, 0.0),
    "tangential_t4": (tangential_t4, 1e-6),
    "orthogonal_pcc": (orthogonal_pcc, 1e-3),
    "geodesic_preservation": (geodesic_preservation, 1e-7),
    "min_sectional": (min_sectional, 1e-6),
}


# pipeline -----------------------------------------------------------------------------------------

def build_context(config):
    """Resolve the fixture and apply the pipeline; returns (metric, submersion, step params)."""
    from .. import fixtures
    from ..deform import cheeger, conformal, fiber_scale, rotation, so2_plane, so3_space, translations
    from ..submersion import SUBMERSIONS, submersion

    sub = metric = None
    if config.fixture in SUBMERSIONS:
        sub = submersion(config.fixture)
        metric = sub.total
    elif config.fixture != "none":
        metric = fixtures.metric(config.fixture)
    steps = {}
    for st in config.pipeline:
        p = st.params
        if st.op == "fiber_scale":
            if sub is None:
                raise ConfigError("fiber_scale needs a submersion fixture")
            metric = fiber_scale(sub, float(p["s"]))
            steps["s"] = float(p["s"])
        elif st.op == "cheeger":
            if metric is None:
                raise ConfigError("cheeger needs a metric fixture")
            groups = {"so2_plane": so2_plane, "so3_space": so3_space,
                      "rotation": lambda: rotation(metric.dimension, 0, 1),
                      "translations": lambda: translations(metric.dimension, list(range(metric.dimension)))}
            if p["group"] not in groups:
                raise ConfigError(f"unknown group {p['group']!r}")
            metric = cheeger(metric, groups[p["group"]](), float(p["l"])).metric
            steps["l"] = float(p["l"])
        elif st.op == "conformal":
            if metric is None:
                raise ConfigError("conformal needs a metric fixture")
            amp, axis = float(p["amplitude"]), int(p["axis"])
            metric = conformal(metric, lambda x, a=amp, k=axis: a * ad.sin(x[k]))
    return metric, sub, steps
