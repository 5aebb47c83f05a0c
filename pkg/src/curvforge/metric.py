"""Chart-based metrics, Levi-Civita connection, curvature and geodesics.

Curvature convention: ``R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`` and
``R(X,Y,Z,W) = g(R(X,Y)Z, W)``, so ``curv(X,W) = R(X,W,W,X)`` is positive on
the round sphere.  In components ``R_{ijkl} = g(R(∂_i,∂_j)∂_k, ∂_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ad
from .errors import DegeneratePlaneError, DomainError, GeodesicDomainExit, HypothesisError
from .errors import NotPositiveDefiniteError, PairingViolation

GRAM_TOL = 1e-12


@dataclass(frozen=True)
class Chart:
    """Axis-aligned coordinate box; periodic axes are never boundary-checked."""

    dimension: int
    lower: tuple
    upper: tuple
    periods: tuple = ()  # ((axis, period), ...)

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("chart dimension must be >= 2")
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != (self.dimension,) or hi.shape != (self.dimension,):
            raise ValueError("bounds must have one entry per axis")
        if np.any(hi <= lo):
            raise ValueError("empty chart box")
        for axis, period in self.periods:
            if period <= 0:
                raise ValueError("periods must be positive")
            if not 0 <= axis < self.dimension:
                raise ValueError("periodic axis out of range")

    @classmethod
    def box(cls, lower, upper, periods=None):
        periods = tuple(sorted((periods or {}).items()))
        return cls(len(lower), tuple(float(x) for x in lower), tuple(float(x) for x in upper), periods)

    @property
    def periodic_axes(self):
        return dict(self.periods)

    @property
    def scale(self):
        return float(np.max(np.asarray(self.upper) - np.asarray(self.lower)))

    def contains(self, p, margin=0.0):
        p = np.asarray(p, float)
        per = self.periodic_axes
        for i in range(self.dimension):
            if i in per:
                continue
            if not (self.lower[i] + margin <= p[i] <= self.upper[i] - margin):
                return False
        return True

    def check(self, p, margin=0.0):
        p = np.asarray(p, float)
        if p.shape != (self.dimension,):
            raise DomainError(f"point has shape {p.shape}, chart dimension {self.dimension}")
        if not np.all(np.isfinite(p)) or not self.contains(p, margin):
            raise DomainError(f"point {p} outside chart (margin {margin:g})")

    def sample(self, rng, n, margin_frac=0.1):
        """``n`` points uniformly inside the box shrunk by ``margin_frac``."""
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        w = hi - lo
        u = rng.uniform(size=(n, self.dimension))
        return lo + w * margin_frac + u * w * (1 - 2 * margin_frac)


class MetricField:
    """A smooth metric ``p -> g(p)`` given by a polymorphic function.

    ``fn`` must accept a coordinate vector (array or :class:`ad.Jet`) and
    return a ``(d, d)`` symmetric matrix built with :mod:`curvforge.ad`
    operations, so it can be differentiated exactly.
    """

    derivative_order = 3

    def __init__(self, chart, fn, name="metric", h=None):
        self.chart = chart
        self._fn = fn
        self.name = name
        self.h = float(h) if h is not None else 1e-4 * chart.scale

    @property
    def dimension(self):
        return self.chart.dimension

    @property
    def stencil_width(self):
        return 2.0 * self.h

    def eval(self, x):
        """Raw evaluation without domain checks; ``x`` may be a jet."""
        return self._fn(x)

    def __call__(self, p):
        p = np.asarray(p, float)
        self.chart.check(p)
        return np.asarray(ad.value(self._fn(p)), float)

    def jet(self, p, order=2):
        p = np.asarray(p, float)
        self.chart.check(p, self.stencil_width)
        out = self._fn(ad.Jet.seed(p, order))
        if not isinstance(out, ad.Jet):
            out = ad.Jet.constant(out, len(p), order)
        return out

    def derivatives(self, p):
        """``(g, dg, ddg)`` with ``dg[i,j,a] = ∂_a g_ij`` and ``ddg[i,j,a,b]``."""
        J = self.jet(p, 2)
        return J.val, J.grad, J.hess

    def third_derivatives(self, p):
        """``dddg[i,j,a,b,c]`` by central differences of exact Hessians."""
        p = np.asarray(p, float)
        d = len(p)
        h = self.h
        self.chart.check(p, self.stencil_width + h)
        out = np.zeros((d, d, d, d, d))
        for c in range(d):
            e = np.zeros(d)
            e[c] = h
            hp = self._fn(ad.Jet.seed(p + e, 2)).hess
            hm = self._fn(ad.Jet.seed(p - e, 2)).hess
            hp2 = self._fn(ad.Jet.seed(p + e / 2, 2)).hess
            hm2 = self._fn(ad.Jet.seed(p - e / 2, 2)).hess
            d1 = (hp - hm) / (2 * h)
            d2 = (hp2 - hm2) / h
            out[..., c] = (4 * d2 - d1) / 3
        return out

    def materialize(self, name=None):
        """Identity wrapper kept for API symmetry with grid-sampled metrics."""
        return MetricField(self.chart, self._fn, name or self.name, self.h)


def check_spd(gm):
    gm = np.asarray(gm, float)
    if not np.allclose(gm, gm.T, atol=1e-10 * max(1.0, np.abs(gm).max())):
        raise NotPositiveDefiniteError("metric matrix is not symmetric")
    try:
        np.linalg.cholesky(0.5 * (gm + gm.T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("metric matrix is not positive definite") from exc
    return gm


@dataclass(frozen=True)
class TangentVector:
    base_point: np.ndarray
    components: np.ndarray

    def __init__(self, base_point, components):
        object.__setattr__(self, "base_point", np.asarray(base_point, float))
        object.__setattr__(self, "components", np.asarray(components, float))


@dataclass(frozen=True)
class Plane:
    u: TangentVector
    v: TangentVector

    def __post_init__(self):
        if not np.array_equal(self.u.base_point, self.v.base_point):
            raise ValueError("plane vectors must share a base point")

    @property
    def base_point(self):
        return self.u.base_point

    @classmethod
    def at(cls, p, u, v):
        return cls(TangentVector(p, u), TangentVector(p, v))


@dataclass(frozen=True)
class CurvatureTensor:
    base_point: np.ndarray
    components: np.ndarray
    metric: np.ndarray = field(repr=False, default=None)

    def __call__(self, X, Y, Z, W):
        return float(np.einsum("ijkl,i,j,k,l->", self.components, X, Y, Z, W))

    def curv(self, X, W):
        return self(X, W, W, X)

    def symmetry_residuals(self):
        R = self.components
        scale = max(1.0, float(np.abs(R).max()))
        anti1 = np.abs(R + R.transpose(1, 0, 2, 3)).max()
        anti2 = np.abs(R + R.transpose(0, 1, 3, 2)).max()
        pair = np.abs(R - R.transpose(2, 3, 0, 1)).max()
        bianchi = np.abs(R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)).max()
        return {"antisym_ij": anti1 / scale, "antisym_kl": anti2 / scale,
                "pair": pair / scale, "bianchi": bianchi / scale}

    def endomorphism(self, X, Y):
        """Components of ``R(X,Y)`` as a (1,1) matrix acting on vectors."""
        gi = np.linalg.inv(self.metric)
        # R(X,Y)Z = R^l_{ijk} X^i Y^j Z^k; R^l_{ijk} = R_{ijkm} g^{ml}
        return np.einsum("ijkm,ml,i,j->lk", self.components, gi, X, Y)

    def apply(self, X, Y, Z):
        """Vector ``R(X,Y)Z``."""
        return self.endomorphism(X, Y) @ np.asarray(Z, float)


# Christoffel symbols and curvature from metric derivatives -------------------

def christoffel_from_derivs(gm, dg):
    """``Γ[k,i,j] = Γ^k_{ij}`` from ``g`` and ``dg[i,j,a] = ∂_a g_ij``."""
    gi = np.linalg.inv(gm)
    # first[l,i,j] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    first = 0.5 * (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg))
    return np.einsum("kl,lij->kij", gi, first)


def christoffel_derivs(gm, dg, ddg):
    """``(Γ, dΓ)`` with ``dΓ[k,i,j,a] = ∂_a Γ^k_{ij}``."""
    gi = np.linalg.inv(gm)
    first = 0.5 * (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg))
    dfirst = 0.5 * (np.einsum("jlia->lija", ddg) + np.einsum("ilja->lija", ddg) - np.einsum("ijla->lija", ddg))
    dgi = -np.einsum("km,mna,nl->kla", gi, dg, gi)
    gam = np.einsum("kl,lij->kij", gi, first)
    dgam = np.einsum("kla,lij->kija", dgi, first) + np.einsum("kl,lija->kija", gi, dfirst)
    return gam, dgam


def riemann_from_derivs(gm, dg, ddg):
    """Covariant ``R_{ijkl}`` from metric derivatives."""
    gam, dgam = christoffel_derivs(gm, dg, ddg)
    # R^l_{ijk} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}
    Rup = (np.einsum("ljki->lijk", dgam) - np.einsum("likj->lijk", dgam)
           + np.einsum("lim,mjk->lijk", gam, gam) - np.einsum("ljm,mik->lijk", gam, gam))
    return np.einsum("mijk,ml->ijkl", Rup, gm)


def fd_metric_derivatives(g, p, h=None):
    """Central-difference oracle for ``(g, dg, ddg)``, Richardson-extrapolated."""
    p = np.asarray(p, float)
    h = g.h if h is None else h
    g.chart.check(p, 2 * h)
    d = len(p)
    ev = lambda q: np.asarray(ad.value(g.eval(q)), float)
    g0 = ev(p)

    def first(hh):
        out = np.zeros((d, d, d))
        for a in range(d):
            e = np.zeros(d)
            e[a] = hh
            out[:, :, a] = (ev(p + e) - ev(p - e)) / (2 * hh)
        return out

    def second(hh):
        out = np.zeros((d, d, d, d))
        for a in range(d):
            ea = np.zeros(d)
            ea[a] = hh
            out[:, :, a, a] = (ev(p + ea) - 2 * g0 + ev(p - ea)) / hh**2
            for b in range(a + 1, d):
                eb = np.zeros(d)
                eb[b] = hh
                v = (ev(p + ea + eb) - ev(p + ea - eb) - ev(p - ea + eb) + ev(p - ea - eb)) / (4 * hh * hh)
                out[:, :, a, b] = v
                out[:, :, b, a] = v
        return out

    dg = (4 * first(h / 2) - first(h)) / 3
    # second differences lose more digits, so use a larger base step
    H = 20 * h
    ddg = (4 * second(H / 2) - second(H)) / 3
    return g0, dg, ddg


# public operations -----------------------------------------------------------

def _point(p):
    return p.base_point if isinstance(p, TangentVector) else np.asarray(p, float)


def christoffel(g, p):
    """Christoffel symbols ``Γ[k,i,j] = Γ^k_{ij}`` at ``p``."""
    p = _point(p)
    J = g.jet(p, 1)
    check_spd(J.val)
    return christoffel_from_derivs(J.val, J.grad)


def christoffel_fd(g, p):
    g0, dg, _ = fd_metric_derivatives(g, p)
    return christoffel_from_derivs(g0, dg)


def metric_compatibility_residual(g, p):
    """``max |∇_a g_ij|`` and torsion residual using jet derivatives."""
    p = _point(p)
    J = g.jet(p, 1)
    gm, dg = J.val, J.grad
    gam = christoffel_from_derivs(gm, dg)
    nabla = dg - np.einsum("mai,mj->ija", gam, gm) - np.einsum("maj,im->ija", gam, gm)
    torsion = np.abs(gam - gam.transpose(0, 2, 1)).max()
    return float(np.abs(nabla).max()), float(torsion)


def riemann(g, p):
    """Covariant curvature tensor at ``p``."""
    p = _point(p)
    gm, dg, ddg = g.derivatives(p)
    check_spd(gm)
    return CurvatureTensor(p, riemann_from_derivs(gm, dg, ddg), gm)


def riemann_fd(g, p, h=None):
    """Curvature tensor via the finite-difference oracle."""
    p = _point(p)
    gm, dg, ddg = fd_metric_derivatives(g, p, h)
    check_spd(gm)
    return CurvatureTensor(p, riemann_from_derivs(gm, dg, ddg), gm)


def gram(gm, u, v):
    return float(u @ gm @ u) * float(v @ gm @ v) - float(u @ gm @ v) ** 2


def curv(g, p, X, W, R=None):
    """Unnormalized ``curv(X,W) = R(X,W,W,X)``."""
    R = riemann(g, p) if R is None else R
    return R.curv(np.asarray(X, float), np.asarray(W, float))


def sectional(g, P, R=None):
    """Sectional curvature of the plane ``P`` (normalized by its Gram determinant)."""
    p = P.base_point
    u, v = P.u.components, P.v.components
    R = riemann(g, p) if R is None else R
    G = gram(R.metric, u, v)
    if G < GRAM_TOL:
        raise DegeneratePlaneError(f"plane Gram determinant {G:.3e} below {GRAM_TOL:g}")
    return R.curv(u, v) / G


def norm(gm, v):
    return float(np.sqrt(v @ gm @ v))


def inner(gm, u, v):
    return float(u @ gm @ v)


# geodesics -------------------------------------------------------------------

@dataclass
class GeodesicCurve:
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    metric_name: str = ""

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    def energies(self, g):
        return np.array([v @ g(x) @ v for x, v in zip(self.points, self.velocities)])


def _rhs(g, x, v):
    gam = christoffel(g, x)
    return v, -np.einsum("kij,i,j->k", gam, v, v)


def geodesic_flow(g, v0, T, steps):
    """Classical RK4 integration of the geodesic equation."""
    x = np.array(v0.base_point, float)
    v = np.array(v0.components, float)
    dt = T / steps
    ts, xs, vs = [0.0], [x.copy()], [v.copy()]
    for n in range(steps):
        try:
            k1x, k1v = _rhs(g, x, v)
            k2x, k2v = _rhs(g, x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
            k3x, k3v = _rhs(g, x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
            k4x, k4v = _rhs(g, x + dt * k3x, v + dt * k3v)
        except DomainError:
            curve = GeodesicCurve(np.array(ts), np.array(xs), np.array(vs), g.name)
            raise GeodesicDomainExit(ts[-1], curve) from None
        x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        ts.append((n + 1) * dt)
        xs.append(x.copy())
        vs.append(v.copy())
        if not g.chart.contains(x, g.stencil_width):
            curve = GeodesicCurve(np.array(ts), np.array(xs), np.array(vs), g.name)
            raise GeodesicDomainExit(ts[-1], curve)
    return GeodesicCurve(np.array(ts), np.array(xs), np.array(vs), g.name)


def _fd4(f, dt):
    """Fourth-order finite-difference derivative along axis 0."""
    n = len(f)
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * dt)
    for i in (0, 1):
        out[i] = (-25 * f[i] + 48 * f[i + 1] - 36 * f[i + 2] + 16 * f[i + 3] - 3 * f[i + 4]) / (12 * dt)
    for i in (n - 1, n - 2):
        out[i] = (25 * f[i] - 48 * f[i - 1] + 36 * f[i - 2] - 16 * f[i - 3] + 3 * f[i - 4]) / (12 * dt)
    return out


def geodesic_residual(g, curve):
    """``max |∇_{γ'}γ'|_g`` along a sampled curve."""
    acc = _fd4(curve.velocities, curve.dt)
    worst = 0.0
    for x, v, a in zip(curve.points, curve.velocities, acc):
        gam = christoffel(g, x)
        r = a + np.einsum("kij,i,j->k", gam, v, v)
        worst = max(worst, norm(g(x), r))
    return worst


@dataclass
class PreservationReport:
    g_residual: float
    pairing_violation: float
    residual: float
    tolerance: float

    @property
    def holds(self):
        return self.residual <= self.tolerance


def check_geodesic_preservation(g, gt, curve, tolerance=1e-7, geodesic_tol=1e-7, pairing_tol=1e-9):
    """Measure whether a ``g``-geodesic is also a ``g̃``-geodesic."""
    g_res = geodesic_residual(g, curve)
    if g_res > geodesic_tol:
        raise HypothesisError(f"curve is not a g-geodesic (residual {g_res:.3e})", residual=g_res)
    pairing = 0.0
    for x, v in zip(curve.points, curve.velocities):
        pairing = max(pairing, float(np.abs((g(x) - gt(x)) @ v).max()))
    if pairing > pairing_tol:
        raise PairingViolation(pairing)
    return PreservationReport(g_res, pairing, geodesic_residual(gt, curve), tolerance)


def covariant_derivative(g, p, X, field_fn):
    """``∇_X F`` at ``p`` for a vector field given as a polymorphic function."""
    p = np.asarray(p, float)
    X = np.asarray(X, float)
    F = field_fn(ad.Jet.seed(p, 1))
    if isinstance(F, ad.Jet):
        Fv, dF = F.val, F.grad
    else:
        Fv, dF = np.asarray(F, float), np.zeros((len(p), len(p)))
    gam = christoffel(g, p)
    return dF @ X + np.einsum("kij,i,j->k", gam, X, Fv)


def killing_residual(g, p, K_fn):
    """``max |(L_K g)_ij|`` for a vector field ``K``."""
    p = np.asarray(p, float)
    J = g.jet(p, 1)
    K = K_fn(ad.Jet.seed(p, 1))
    if isinstance(K, ad.Jet):
        Kv, dK = K.val, K.grad  # dK[k,i] = ∂_i K^k
    else:
        Kv, dK = np.asarray(K, float), np.zeros((len(p), len(p)))
    gm, dg = J.val, J.grad
    L = np.einsum("ijk,k->ij", dg, Kv) + np.einsum("kj,ki->ij", gm, dK) + np.einsum("ik,kj->ij", gm, dK)
    return float(np.abs(L).max())
