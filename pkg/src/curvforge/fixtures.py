"""Catalog of model metrics addressable by string id.

Chart choices are implementation decisions; every fixture lives in a single
coordinate box chosen so that tests stay away from coordinate singularities.
"""

from __future__ import annotations

import numpy as np

from . import ad
from .metric import Chart, MetricField

TWO_PI = 2 * np.pi


def _diag(entries):
    d = len(entries)
    rows = []
    for i in range(d):
        rows.append([entries[i] if i == j else 0.0 for j in range(d)])
    return ad.array(rows)


def flat(d, periodic=False, half_width=10.0):
    if periodic:
        chart = Chart.box([0.0] * d, [TWO_PI] * d, {i: TWO_PI for i in range(d)})
        name = f"flat_t{d}"
    else:
        chart = Chart.box([-half_width] * d, [half_width] * d)
        name = f"flat_r{d}"
    eye = np.eye(d)
    return MetricField(chart, lambda x: eye, name)


def polar_flat():
    chart = Chart.box([0.1, 0.0], [10.0, TWO_PI], {1: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, x[0] * x[0]]), "polar_flat")


def sphere_stereo(d):
    chart = Chart.box([-3.0] * d, [3.0] * d)

    def fn(x):
        r2 = sum(x[i] * x[i] for i in range(d))
        c = 4.0 / ((1.0 + r2) * (1.0 + r2))
        return _diag([c] * d)

    return MetricField(chart, fn, f"s{d}_stereo")


def s2_polar():
    """Round unit S² pulled back by (θ, φ) ↦ (sinθ cosφ, sinθ sinφ, cosθ)."""
    chart = Chart.box([0.05, 0.0], [np.pi - 0.05, TWO_PI], {1: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, ad.sin(x[0]) ** 2]), "s2_round")


def hopf_embedding(x):
    """(η, ξ1, ξ2) ↦ (sinη cosξ1, sinη sinξ1, cosη cosξ2, cosη sinξ2) in ℝ⁴."""
    eta, x1, x2 = x[0], x[1], x[2]
    return ad.stack([ad.sin(eta) * ad.cos(x1), ad.sin(eta) * ad.sin(x1),
                     ad.cos(eta) * ad.cos(x2), ad.cos(eta) * ad.sin(x2)])


def hopf_embedding_jacobian(x):
    """Analytic 4×3 Jacobian of :func:`hopf_embedding`."""
    eta, x1, x2 = x[0], x[1], x[2]
    se, ce = ad.sin(eta), ad.cos(eta)
    return ad.array([
        [ce * ad.cos(x1), -se * ad.sin(x1), 0.0],
        [ce * ad.sin(x1), se * ad.cos(x1), 0.0],
        [-se * ad.cos(x2), 0.0, -ce * ad.sin(x2)],
        [-se * ad.sin(x2), 0.0, ce * ad.cos(x2)],
    ])


def s3_round():
    """Unit S³ in Hopf coordinates: dη² + sin²η dξ1² + cos²η dξ2²."""
    chart = Chart.box([0.1, 0.0, 0.0], [np.pi / 2 - 0.1, TWO_PI, TWO_PI], {1: TWO_PI, 2: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, ad.sin(x[0]) ** 2, ad.cos(x[0]) ** 2]), "s3_round")


def s3_pullback():
    """Unit S³ metric computed as JᵀJ of the embedding (embedded-pullback chart)."""
    chart = s3_round().chart

    def fn(x):
        J = hopf_embedding_jacobian(x)
        return ad.matmul(J.T, J)

    return MetricField(chart, fn, "s3_pullback")


def s2_half():
    """S²(1/2) base of the Hopf map: dη² + sin²η cos²η dφ²."""
    chart = Chart.box([0.1, 0.0], [np.pi / 2 - 0.1, TWO_PI], {1: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, (ad.sin(x[0]) * ad.cos(x[0])) ** 2]), "s2_half")


def conformal_gauss():
    """ℝ² with e^{2f}(dx²+dy²), f = (x²+y²)/2; Gauss curvature −2 at 0."""
    chart = Chart.box([-2.0, -2.0], [2.0, 2.0])

    def fn(x):
        c = ad.exp(x[0] * x[0] + x[1] * x[1])
        return _diag([c, c])

    return MetricField(chart, fn, "conformal_gauss")


def warped_surface(name="warped_sin", phi="sin"):
    """Surface of revolution dr² + φ(r)² dθ²."""
    funcs = {
        "sin": (ad.sin, (0.1, np.pi - 0.1)),
        "sinh": (ad.sinh, (0.1, 2.0)),
        "lin": (lambda r: r, (0.1, 5.0)),
    }
    f, (lo, hi) = funcs[phi]
    chart = Chart.box([lo, 0.0], [hi, TWO_PI], {1: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, f(x[0]) ** 2]), name)


def s2xs2():
    """Product of two round unit spheres in polar coordinates (θ1, φ1, θ2, φ2)."""
    chart = Chart.box([0.2, 0.0, 0.2, 0.0], [np.pi - 0.2, TWO_PI, np.pi - 0.2, TWO_PI],
                      {1: TWO_PI, 3: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, ad.sin(x[0]) ** 2, 1.0, ad.sin(x[2]) ** 2]), "s2xs2")


def nil3():
    """Heisenberg-type metric dx² + dy² + (dz + x dy)² (twisted product)."""
    chart = Chart.box([-2.0, -2.0, 0.0], [2.0, 2.0, TWO_PI], {2: TWO_PI})

    def fn(x):
        a = x[0]
        return ad.array([[1.0, 0.0, 0.0], [0.0, 1.0 + a * a, a], [0.0, a, 1.0]])

    return MetricField(chart, fn, "product_twist")


def s2xs1():
    """S² × S¹ product in (r, θ, z): dr² + sin²r dθ² + dz²."""
    chart = Chart.box([0.1, 0.0, 0.0], [np.pi - 0.1, TWO_PI, TWO_PI], {1: TWO_PI, 2: TWO_PI})
    return MetricField(chart, lambda x: _diag([1.0, ad.sin(x[0]) ** 2, 1.0]), "s2xs1")


def warped_r3(c=0.05):
    """SO(3)-invariant metric dr² + f(r)² g_{S²} on ℝ³ with f = r + c r³.

    Tangential planes have sectional curvature (1 − f′²)/f² < 0.
    """
    chart = Chart.box([-2.0] * 3, [2.0] * 3)

    def fn(x):
        r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
        a = (1.0 + c * r2) ** 2
        b = -2.0 * c - c * c * r2
        rows = []
        for i in range(3):
            rows.append([a * (1.0 if i == j else 0.0) + b * x[i] * x[j] for j in range(3)])
        return ad.array(rows)

    return MetricField(chart, fn, "warped_r3")


CATALOG = {
    "flat_r2": lambda: flat(2),
    "flat_r3": lambda: flat(3),
    "flat_r4": lambda: flat(4),
    "flat_t2": lambda: flat(2, True),
    "flat_t3": lambda: flat(3, True),
    "flat_t4": lambda: flat(4, True),
    "polar_flat": polar_flat,
    "s2_stereo": lambda: sphere_stereo(2),
    "s3_stereo": lambda: sphere_stereo(3),
    "s2_round": s2_polar,
    "s3_round": s3_round,
    "s3_pullback": s3_pullback,
    "hopf_total": s3_round,
    "s2_half": s2_half,
    "conformal_gauss": conformal_gauss,
    "warped_sin": lambda: warped_surface("warped_sin", "sin"),
    "warped_sinh": lambda: warped_surface("warped_sinh", "sinh"),
    "s2xs2": s2xs2,
    "product_twist": nil3,
    "s2xs1": s2xs1,
    "warped_r3": warped_r3,
}


def metric(name):
    """Look up a catalog metric by id."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown metric fixture {name!r}") from None
    g = factory()
    g.name = name
    return g
