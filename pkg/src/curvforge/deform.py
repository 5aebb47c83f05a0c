"""Metric deformations and the curvature identities they come with."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ad
from .errors import DegeneratePlaneError, HypothesisError, InvariantError
from .metric import MetricField, christoffel, covariant_derivative, gram, killing_residual, norm, riemann
from .submersion import a_tensor, a_tensor_general, base_curvature_lift


# data types ----------------------------------------------------------------------

class DistributionSpec:
    """A distribution given by a polymorphic basis ``x -> (d, rank)`` matrix."""

    def __init__(self, rank, basis, name="D"):
        self.rank = rank
        self.basis = basis
        self.name = name

    def basis_at(self, p):
        return np.asarray(ad.value(self.basis(np.asarray(p, float))), float).reshape(len(p), self.rank)

    def check(self, g, p, tol=1e-10):
        B = self.basis_at(p)
        det = float(np.linalg.det(B.T @ g(p) @ B))
        if det <= tol:
            raise HypothesisError(f"distribution {self.name} drops rank at {p} (Gram det {det:.2e})",
                                  residual=det)
        return det

    def projector(self, g, x):
        """Polymorphic g-orthogonal projector onto the distribution."""
        G = g.eval(x)
        B = self.basis(x)
        if not isinstance(B, ad.Jet) and isinstance(G, ad.Jet):
            B = G._lift(np.asarray(B, float))
        BtG = ad.matmul(B.T, G)
        return ad.matmul(ad.matmul(B, ad.inv(ad.matmul(BtG, B))), BtG)


def coordinate_distribution(d, axes, name=None):
    """Span of the coordinate fields ``∂_i`` for ``i`` in ``axes``."""
    B = np.zeros((d, len(axes)))
    for j, i in enumerate(axes):
        B[i, j] = 1.0
    return DistributionSpec(len(axes), lambda x: B, name or f"span{tuple(axes)}")


@dataclass
class ConformalData:
    f: object  # polymorphic x -> scalar

    def value(self, p):
        return float(ad.value(self.f(np.asarray(p, float))))

    def grad(self, g, p):
        _, df, _ = ad.derivatives(self.f, p, order=1)
        return np.linalg.solve(g(p), df)

    def differential(self, p):
        _, df, _ = ad.derivatives(self.f, p, order=1)
        return df

    def hess(self, g, p):
        """Covariant Hessian matrix ``∇²f`` at ``p``."""
        p = np.asarray(p, float)
        _, df, ddf = ad.derivatives(self.f, p, order=2)
        return ddf - np.einsum("kab,k->ab", christoffel(g, p), df)


def _as_conformal(f):
    return f if isinstance(f, ConformalData) else ConformalData(f)


# conformal and partial conformal changes --------------------------------------------------

def conformal(g, f):
    """``g̃ = e^{2f} g``."""
    f = _as_conformal(f)

    def fn(x):
        return ad.exp(2.0 * f.f(x)) * g.eval(x)

    return MetricField(g.chart, fn, f"conformal({g.name})", g.h)


def conformal_identity(g, f, p, X, W, tol=1e-9):
    """Both sides of the conformal curv(X,W) identity for unit X, W ⊥ grad f, X ⊥ W."""
    f = _as_conformal(f)
    p = np.asarray(p, float)
    X, W = np.asarray(X, float), np.asarray(W, float)
    gm = g(p)
    gradf = f.grad(g, p)
    side = {"X_unit": abs(X @ gm @ X - 1), "W_perp_grad": abs(W @ gm @ gradf), "X_perp_W": abs(X @ gm @ W)}
    if max(side.values()) > tol:
        raise HypothesisError(f"conformal identity side conditions fail: {side}")
    gt = conformal(g, f)
    lhs = np.exp(-2 * f.value(p)) * riemann(gt, p).curv(X, W)
    H = f.hess(g, p)
    W2 = W @ gm @ W
    rhs = (riemann(g, p).curv(X, W) - W2 * (X @ H @ X) - W @ H @ W
           + (f.differential(p) @ X) ** 2 * W2 - (gradf @ gm @ gradf) * W2)
    return lhs, rhs


def partial_conformal(g, D, factor):
    """Multiply ``g`` by ``factor`` on ``D`` and keep ``D^⊥`` (g-orthogonal) fixed."""

    def fn(x):
        G = g.eval(x)
        P = D.projector(g, x)
        return G + (factor(x) - 1.0) * ad.matmul(G, P)

    return MetricField(g.chart, fn, f"pcc({g.name},{D.name})", g.h)


# orthogonal partial conformal change ----------------------------------------------------------

def bump(t, center=np.pi, width=np.pi):
    """Smooth compactly supported bump with peak value 1 at ``center``."""
    u = (t - center) / width
    inside = np.abs(ad.value(u)) < 1.0
    us = ad.where(inside, u, 0.0 * u)
    core = ad.exp(1.0 - 1.0 / (1.0 - us * us))
    return ad.where(inside, core, 0.0 * u)


@dataclass
class RedistributionReport:
    times: np.ndarray
    measured: np.ndarray   # R̃(V,X,X,V) − R(V,X,X,V)
    predicted: np.ndarray  # −φ″ |V|² |X|²
    residual: np.ndarray
    integral_measured: float
    integral_predicted: float
    flat_violation: float
    eps: float


def orthogonal_pcc(g, O, r, f_shape, eps=None):
    """Scale lengths in ``O`` by ``φ = f_shape ∘ r`` (metric factor φ²)."""

    def factor(x):
        return f_shape(r(x)) ** 2

    gt = partial_conformal(g, O, factor)
    gt.name = f"opcc({g.name})"
    return gt


def _second_derivative_along(fn, X_fn, p):
    """``D_X D_X φ`` for a scalar φ and vector field X, both polymorphic."""
    p = np.asarray(p, float)
    _, dphi, ddphi = ad.derivatives(fn, p, order=2)
    Xj = X_fn(ad.Jet.seed(p, 1))
    if isinstance(Xj, ad.Jet):
        X, dX = Xj.val, Xj.grad
    else:
        X, dX = np.asarray(Xj, float), np.zeros((len(p), len(p)))
    return float(X @ ddphi @ X + dphi @ (dX @ X))


def redistribution_report(g, gt, O, r, f_shape, X_fn, curve_points, flat_planes=(), eps=None):
    """Measure the curvature moved by an orthogonal pcc along an X integral curve.

    ``curve_points`` are equally spaced along the curve (unit speed in ``t``);
    ``flat_planes`` are ``(p, u, v)`` triples spanning planes that were flat.
    """
    pts = [np.asarray(p, float) for p in curve_points]
    phi = lambda x: f_shape(r(x))
    meas, pred = [], []
    for p in pts:
        X = np.asarray(ad.value(X_fn(p)), float)
        V = O.basis_at(p)[:, 0]
        gm = g(p)
        delta = riemann(gt, p).curv(V, X) - riemann(g, p).curv(V, X)
        pp = _second_derivative_along(phi, X_fn, p)
        meas.append(delta)
        pred.append(-pp * (V @ gm @ V) * (X @ gm @ X))
    meas, pred = np.array(meas), np.array(pred)
    ts = np.array([float(ad.value(r(p))) for p in pts])
    flat_violation = 0.0
    for p, u, v in flat_planes:
        flat_violation = max(flat_violation, abs(riemann(gt, p).curv(u, v)))
    from scipy.integrate import simpson
    return RedistributionReport(ts, meas, pred, meas - pred, float(simpson(meas, x=ts)),
                                float(simpson(pred, x=ts)), flat_violation, eps or 0.0)


def flats_preservation_residual(g, gt, points, tangent_fn):
    """max |g̃(v,·) − g(v,·)| for v tangent to the flats."""
    worst = 0.0
    for p in points:
        for v in tangent_fn(p):
            worst = max(worst, float(np.abs((gt(p) - g(p)) @ v).max()))
    return worst


# fiber scaling ----------------------------------------------------------------------------

def fiber_scale(sub, s):
    """Canonical variation: fibres scaled by √(1−s²)."""
    if not 0.0 <= s < 1.0:
        raise ValueError(f"fiber scale s must lie in [0, 1), got {s}")
    g = sub.total

    def fn(x):
        G = g.eval(x)
        return G - (s * s) * ad.matmul(G, sub.vertical_projector(x))

    return MetricField(g.chart, fn, f"fiber_scale({g.name},{s:g})", g.h)


def fiber_scaled_submersion(sub, s):
    return sub.with_total(fiber_scale(sub, s), f"{sub.name}_s{s:g}")


@dataclass
class DetlefResiduals:
    eq_vertical: float     # (R_s(X,V)U)^H line
    eq_mixed: float        # R_s(V,X)Y line
    eq_horizontal: float   # R_s(X,Y)Z line
    lemma_first: float     # R_s(W,X)X assembly
    lemma_second: float    # (R_s(X,W)W)^H assembly
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {"eq_vertical": self.eq_vertical, "eq_mixed": self.eq_mixed,
                "eq_horizontal": self.eq_horizontal, "lemma_first": self.lemma_first,
                "lemma_second": self.lemma_second}


def detlef_identities(sub, s, p, X, Y, Z, U, V, W):
    """Residuals of the canonical-variation curvature identities at ``p``.

    ``X, Y, Z`` horizontal, ``U, V`` vertical, ``W`` arbitrary; the A-tensor
    and R are those of the unscaled metric.
    """
    p = np.asarray(p, float)
    gs = fiber_scale(sub, s)
    R = riemann(sub.total, p)
    Rs = riemann(gs, p)
    PH, PV = sub.projectors(p)
    gm = sub.total(p)
    k = 1 - s * s
    A = lambda E, F: a_tensor_general(sub, p, E, F)
    RB = lambda a, b, c: base_curvature_lift(sub, p, a, b, c)

    lhs1 = PH @ Rs.apply(X, V, U)
    rhs1 = k * (PH @ R.apply(X, V, U)) + k * s * s * A(A(X, U), V)
    lhs2 = Rs.apply(V, X, Y)
    rhs2 = k * R.apply(V, X, Y) + s * s * (PV @ R.apply(V, X, Y)) + s * s * A(X, A(Y, V))
    lhs3 = Rs.apply(X, Y, Z)
    rhs3 = k * R.apply(X, Y, Z) + s * s * (PV @ R.apply(X, Y, Z)) + s * s * RB(X, Y, Z)

    WH, WV = PH @ W, PV @ W
    lhs4 = Rs.apply(W, X, X)
    rhs4 = (k * R.apply(W, X, X) + s * s * (PV @ R.apply(W, X, X)) + s * s * RB(WH, X, X)
            + s * s * A(X, A(X, WV)))
    lhs5 = PH @ Rs.apply(X, W, W)
    rhs5 = (k * (PH @ R.apply(X, W, W)) + k * s * s * A(A(X, WV), WV) + s * s * RB(X, WH, WH))
    n = lambda v: norm(gm, v)
    return DetlefResiduals(n(lhs1 - rhs1), n(lhs2 - rhs2), n(lhs3 - rhs3), n(lhs4 - rhs4), n(lhs5 - rhs5),
                           {"lemma_second_lhs": lhs5, "lemma_second_rhs": rhs5})


def lemma_second_cross_terms(sub, s, p, X, W):
    """Horizontal parts of R_s(X,W^H)W^V + R_s(X,W^V)W^H, the terms the second assembly omits."""
    p = np.asarray(p, float)
    Rs = riemann(fiber_scale(sub, s), p)
    PH, PV = sub.projectors(p)
    WH, WV = PH @ W, PV @ W
    return PH @ (Rs.apply(X, WH, WV) + Rs.apply(X, WV, WH))


def berger_sectionals(sub, s, p, X, Y, V):
    """(vertizontal, horizontal) sectional curvatures of the fibre-scaled metric."""
    gs = fiber_scale(sub, s)
    R = riemann(gs, p)
    gm = gs(p)
    return R.curv(X, V) / gram(gm, X, V), R.curv(X, Y) / gram(gm, X, Y)


# Cheeger deformation ------------------------------------------------------------------------

class GroupActionSpec:
    """Isometric action through Killing fields ``killing(x) -> (d, lie_dim)``.

    ``bi`` is the biinvariant inner product on the Lie algebra in the chosen
    basis, ``bracket[i,j,k]`` the structure constants ``[e_j,e_k] = c^i_{jk} e_i``.
    ``blocks`` lists ``(start, stop)`` algebra index ranges of product factors.
    """

    def __init__(self, lie_dim, killing, bracket, bi, blocks=None, name="G", act=None):
        self.lie_dim = lie_dim
        self.killing = killing
        self.act = act  # optional polymorphic (theta, x) -> point, abelian groups only
        self.bracket = np.asarray(bracket, float)
        self.bi = np.asarray(bi, float)
        self.blocks = blocks or [(0, lie_dim)]
        self.name = name
        if not np.allclose(self.bi, self.bi.T) or np.any(np.linalg.eigvalsh(self.bi) <= 0):
            raise ValueError("bi must be symmetric positive definite")

    def killing_at(self, p):
        return np.asarray(ad.value(self.killing(np.asarray(p, float))), float).reshape(len(p), self.lie_dim)

    def scaled_bi(self, scales):
        """Block-diagonal ``diag(s_1² bi_1, s_2² bi_2, ...)``."""
        if np.isscalar(scales):
            scales = [scales] * len(self.blocks)
        S = np.zeros(self.lie_dim)
        for (a, b), s in zip(self.blocks, scales):
            S[a:b] = s
        return self.bi * np.outer(S, S)

    def killing_residual(self, g, p):
        worst = 0.0
        for a in range(self.lie_dim):
            worst = max(worst, killing_residual(g, p, lambda x, a=a: self.killing(x)[:, a]
                                                if isinstance(self.killing(x), ad.Jet)
                                                else np.asarray(self.killing(x))[:, a]))
        return worst

    @property
    def abelian(self):
        return not np.any(self.bracket)

    def curv_group(self, a, b):
        """Curvature of the biinvariant metric ``bi`` (scale 1): ¼|[a,b]|²."""
        br = np.einsum("ijk,j,k->i", self.bracket, a, b)
        return 0.25 * float(br @ self.bi @ br)


def rotation(d=2, i=0, j=1):
    """SO(2) rotating the (x_i, x_j) coordinate plane of ℝ^d."""

    def killing(x):
        rows = [0.0 * x[0]] * d
        rows[i], rows[j] = -x[j], x[i]
        return ad.stack([ad.stack([r]) for r in rows])

    def act(theta, x):
        c, s = ad.cos(theta[0]), ad.sin(theta[0])
        out = [x[k] for k in range(d)]
        out[i], out[j] = c * x[i] - s * x[j], s * x[i] + c * x[j]
        return ad.stack(out)

    return GroupActionSpec(1, killing, np.zeros((1, 1, 1)), np.eye(1), name="SO(2)", act=act)


def so2_plane():
    return rotation(2, 0, 1)


def so3_space():
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0

    def killing(x):
        # column a is e_a × x
        cols = [ad.stack([0.0 * x[0], -x[2], x[1]]),
                ad.stack([x[2], 0.0 * x[0], -x[0]]),
                ad.stack([-x[1], x[0], 0.0 * x[0]])]
        return ad.stack(cols, axis=1)

    return GroupActionSpec(3, killing, eps, np.eye(3), name="SO(3)")


def translations(d, axes, name="T"):
    """Torus/translation action along coordinate ``axes``."""
    K = np.zeros((d, len(axes)))
    for j, i in enumerate(axes):
        K[i, j] = 1.0

    def act(theta, x):
        return x + ad.matmul(K, theta)

    return GroupActionSpec(len(axes), lambda x: K, np.zeros((len(axes),) * 3), np.eye(len(axes)),
                           name=name, act=act)


@dataclass
class CheegerDeformation:
    metric: MetricField
    group: GroupActionSpec
    scales: object
    base: MetricField

    def B(self):
        return self.group.scaled_bi(self.scales)

    def lift(self, p, v):
        """Lie algebra part ``k_v`` of the horizontal lift of ``v`` in G×M."""
        K = self.group.killing_at(p)
        return np.linalg.solve(self.B(), K.T @ self.base(p) @ np.asarray(v, float))

    def reparametrize(self, p, v):
        """Cheeger reparametrization ``C(v) = Dq(v̂) = v + K k_v``."""
        return np.asarray(v, float) + self.group.killing_at(p) @ self.lift(p, v)

    def stabilizer_flag(self, p, tol=1e-10):
        K = self.group.killing_at(p)
        M = K.T @ self.base(p) @ K
        ev = np.linalg.eigvalsh(M)
        return bool(ev.min() < tol * max(1.0, ev.max()))


def cheeger(g, G, scales, check_points=None, killing_tol=1e-6):
    """Cheeger deformation ``g_l`` with group metric ``diag(s² bi)``.

    ``g_l = g − gK(B + KᵀgK)⁻¹Kᵀg`` with ``B`` the scaled biinvariant metric;
    the linear system is ``lie_dim × lie_dim`` and always positive definite.
    """
    for p in (check_points or []):
        r = G.killing_residual(g, p)
        if r > killing_tol:
            raise HypothesisError(f"Killing residual {r:.2e} at {p}", residual=r)
    B = G.scaled_bi(scales)

    def fn(x):
        Gm = g.eval(x)
        K = G.killing(x)
        if not isinstance(K, ad.Jet) and isinstance(Gm, ad.Jet):
            K = Gm._lift(np.asarray(K, float))
        GK = ad.matmul(Gm, K)
        Mx = ad.matmul(K.T, GK) + B
        return Gm - ad.matmul(ad.matmul(GK, ad.inv(Mx)), GK.T)

    name = f"cheeger({g.name},{G.name})"
    return CheegerDeformation(MetricField(g.chart, fn, name, g.h), G, scales, g)


def pairing_residual(ch, p, u, w):
    """|g_∞(u,w) − g_l(u, C(w))|."""
    return abs(float(u @ ch.base(p) @ w) - float(u @ ch.metric(p) @ ch.reparametrize(p, w)))


def lift_identity_residual(ch, p, u, w):
    """|g_l(Cu,Cw) − (B(k_u,k_w) + g(u,w))|."""
    Cu, Cw = ch.reparametrize(p, u), ch.reparametrize(p, w)
    lhs = float(Cu @ ch.metric(p) @ Cw)
    rhs = float(ch.lift(p, u) @ ch.B() @ ch.lift(p, w)) + float(u @ ch.base(p) @ w)
    return abs(lhs - rhs)


@dataclass
class CheegerPrincipleRow:
    l: float
    curv: float
    bound: float
    margin: float
    stabilizer: bool


def cheeger_curvature_principles(g, G, p, v, w, l_schedule):
    """Reparametrized curvature vs ``(1/l⁶)curv_{G,1}(k_v,k_w) + curv_M(v,w)``."""
    p = np.asarray(p, float)
    v, w = np.asarray(v, float), np.asarray(w, float)
    K = G.killing_at(p)
    gm = g(p)
    k1v = np.linalg.solve(G.bi, K.T @ gm @ v)
    k1w = np.linalg.solve(G.bi, K.T @ gm @ w)
    curvM = riemann(g, p).curv(v, w)
    cG = G.curv_group(k1v, k1w)
    rows = []
    for l in l_schedule:
        ch = cheeger(g, G, l)
        Cv, Cw = ch.reparametrize(p, v), ch.reparametrize(p, w)
        c = riemann(ch.metric, p).curv(Cv, Cw)
        bound = cG / l**6 + curvM
        rows.append(CheegerPrincipleRow(float(l), c, bound, c - bound, ch.stabilizer_flag(p)))
    return rows


def cheeger_crossing(g, G, p, v, w, l_lo, l_hi, iters=60):
    """Largest ``l`` in [l_lo, l_hi] at which the reparametrized curvature is positive.

    Returns (l_curv, l_bound): the brute-force crossing of curv_{g_l}(Cv,Cw)
    and the crossing of the lower bound, ``(curv_G/|curv_M|)^{1/6}``.
    """
    f = lambda l: cheeger_curvature_principles(g, G, p, v, w, [l])[0].curv
    lo, hi = l_lo, l_hi
    if f(lo) <= 0 or f(hi) > 0:
        raise HypothesisError("no sign change of the reparametrized curvature in the bracket")
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    K = G.killing_at(p)
    gm = g(p)
    k1v = np.linalg.solve(G.bi, K.T @ gm @ v)
    k1w = np.linalg.solve(G.bi, K.T @ gm @ w)
    cG = G.curv_group(k1v, k1w)
    cM = riemann(g, p).curv(v, w)
    l_bound = (cG / -cM) ** (1 / 6) if cM < 0 else np.inf
    return float(np.sqrt(lo * hi)), float(l_bound)


# tangential partial conformal change ------------------------------------------------------

def lie_bracket(p, U_fn, V_fn):
    """``[U,V]^a = U^b ∂_b V^a − V^b ∂_b U^a``."""
    p = np.asarray(p, float)

    def parts(F):
        J = F(ad.Jet.seed(p, 1))
        if isinstance(J, ad.Jet):
            return J.val, J.grad
        J = np.asarray(J, float)
        return J, np.zeros(J.shape + (len(p),))

    U, dU = parts(U_fn)
    V, dV = parts(V_fn)
    return dV @ U - dU @ V


def _col(D, j):
    def fn(x):
        B = D.basis(x)
        if isinstance(B, ad.Jet):
            return B[:, j]
        return np.asarray(B, float)[:, j]
    return fn


def _perp_fields(g, D, d):
    """Fields spanning D^⊥: (I − P_D) applied to coordinate fields."""
    out = []
    for i in range(d):
        e = np.eye(d)[i]

        def fn(x, e=e):
            P = D.projector(g, x)
            return e - ad.matmul(P, e)

        out.append(fn)
    return out


def tangential_hypotheses(g, Xd, Ad, Gd, f, X_fn, points, tol=1e-6):
    """Spot checks of the six setup hypotheses; returns residual per index."""
    f = _as_conformal(f)
    d = g.dimension
    res = {i: 0.0 for i in range(1, 7)}
    res[0] = 0.0  # mutual orthogonality
    for p in points:
        p = np.asarray(p, float)
        gm = g(p)
        BX, BA, BG = Xd.basis_at(p), Ad.basis_at(p), Gd.basis_at(p)
        res[0] = max(res[0], float(np.abs(BX.T @ gm @ BA).max()), float(np.abs(BX.T @ gm @ BG).max()),
                     float(np.abs(BA.T @ gm @ BG).max()))
        PX = np.asarray(ad.value(Xd.projector(g, p)), float)
        PA = np.asarray(ad.value(Ad.projector(g, p)), float)
        PG = np.asarray(ad.value(Gd.projector(g, p)), float)
        Xcols = [_col(Xd, j) for j in range(Xd.rank)]
        Acols = [_col(Ad, j) for j in range(Ad.rank)]
        Gcols = [_col(Gd, j) for j in range(Gd.rank)]
        # 1: X integrable and totally geodesic
        for a in Xcols:
            for b in Xcols:
                res[1] = max(res[1], norm(gm, (np.eye(d) - PX) @ lie_bracket(p, a, b)),
                             norm(gm, (np.eye(d) - PX) @ covariant_derivative(g, p, a(p), b)))
        # 2: span{Z, U} totally geodesic and flat
        R = riemann(g, p)
        for a in Xcols:
            for b in Acols:
                za, ub = np.asarray(ad.value(a(p))), np.asarray(ad.value(b(p)))
                P2 = PX + PA
                res[2] = max(res[2], abs(R.curv(za, ub)),
                             norm(gm, (np.eye(d) - P2) @ covariant_derivative(g, p, za, b)),
                             norm(gm, (np.eye(d) - P2) @ covariant_derivative(g, p, ub, a)))
        # 3: [X, A^⊥] ⊂ A^⊥
        for a in Xcols:
            for b in _perp_fields(g, Ad, d):
                res[3] = max(res[3], norm(gm, PA @ lie_bracket(p, a, b)))
        # 4: grad f ∈ X
        res[4] = max(res[4], norm(gm, (np.eye(d) - PX) @ f.grad(g, p)))
        # 5: X geodesic
        Xp = np.asarray(ad.value(X_fn(p)), float)
        res[5] = max(res[5], norm(gm, covariant_derivative(g, p, Xp, X_fn)), norm(gm, (np.eye(d) - PX) @ Xp))
        # 6: [X, G] ⊂ G
        for b in Gcols:
            res[6] = max(res[6], norm(gm, (np.eye(d) - PG) @ lie_bracket(p, X_fn, b)))
    for i in range(7):
        if res[i] > tol:
            raise HypothesisError(f"tangential pcc hypothesis {i} fails (residual {res[i]:.2e})",
                                  index=i, residual=res[i])
    return res


def tangential_pcc(g, Xd, Ad, Gd, f, perturbation=None):
    """Scale span{X, G} by e^{2f}, keep its complement; optional C⁰ change beyond X⊕A⊕G.

    ``perturbation`` is a polymorphic scalar ``h`` multiplying the metric on
    the complement of span{X, A, G} by ``1 + h``.
    """
    f = _as_conformal(f)
    XG = DistributionSpec(Xd.rank + Gd.rank,
                          lambda x: ad.hstack([Xd.basis(x), Gd.basis(x)]), "X+G")
    XAG = DistributionSpec(Xd.rank + Ad.rank + Gd.rank,
                           lambda x: ad.hstack([Xd.basis(x), Ad.basis(x), Gd.basis(x)]), "X+A+G")

    def fn(x):
        G = g.eval(x)
        P = XG.projector(g, x)
        out = G + (ad.exp(2.0 * f.f(x)) - 1.0) * ad.matmul(G, P)
        if perturbation is not None:
            Q = XAG.projector(g, x)
            I = np.eye(g.dimension)
            C = I - Q
            out = out + perturbation(x) * ad.matmul(G, C)
        return out

    return MetricField(g.chart, fn, f"tpcc({g.name})", g.h)


@dataclass
class TangentialReport:
    hypotheses: dict
    curv_tilde: float     # R̃(W,X,X,W)
    curv_bar: float       # R̄(W^γ,X,X,W^γ)
    equality_residual: float
    omega_residual: float  # max |ω̃^α_z|, |ω̃^i_z(U^α)|, |ω̃^i_α(z)|
    perturbation_size: float


def _adapted_frame(gt, dists):
    """g̃-orthonormal frame: Gram–Schmidt on the concatenated distribution bases."""
    d = gt.dimension

    def fn(x):
        G = gt.eval(x)
        cols = []
        for D in dists:
            B = D.basis(x)
            for j in range(D.rank):
                cols.append(B[:, j] if isinstance(B, ad.Jet) else np.asarray(B, float)[:, j])
        for i in range(d):
            cols.append(np.eye(d)[i])
        vecs = []
        for v in cols:
            for u in vecs:
                v = v - ad.einsum("i,ij,j->", u, G, v) * u
            nv = ad.einsum("i,ij,j->", v, G, v)
            if float(ad.value(nv)) < 1e-10:
                continue
            vecs.append(v / ad.sqrt(nv))
            if len(vecs) == d:
                break
        return ad.stack(vecs, axis=1)

    return fn


def tangential_report(g, Xd, Ad, Gd, f, X_fn, p, W, sample_points=None, perturbation=None, tol=1e-6):
    from .frames import Coframe, connection_and_curvature_forms
    f = _as_conformal(f)
    p = np.asarray(p, float)
    hyp = tangential_hypotheses(g, Xd, Ad, Gd, f, X_fn, sample_points or [p], tol)
    gt = tangential_pcc(g, Xd, Ad, Gd, f, perturbation)
    gb = conformal(g, f)
    X = np.asarray(ad.value(X_fn(p)), float)
    PG = np.asarray(ad.value(Gd.projector(g, p)), float)
    Wg = PG @ np.asarray(W, float)
    ct = riemann(gt, p).curv(W, X)
    cb = riemann(gb, p).curv(Wg, X)
    cf = Coframe(gt, _adapted_frame(gt, [Xd, Ad, Gd]), "adapted")
    forms = connection_and_curvature_forms(cf, p)
    om = forms.omega_frame  # ω^i_j(E_k)
    zs = list(range(Xd.rank))
    als = list(range(Xd.rank, Xd.rank + Ad.rank))
    worst = 0.0
    for z in zs:
        for a in als:
            worst = max(worst, float(np.abs(om[a, z, :]).max()),
                        float(np.abs(om[:, z, a]).max()), float(np.abs(om[:, a, z]).max()))
    size = 0.0
    if perturbation is not None:
        size = abs(float(ad.value(perturbation(p))))
    return TangentialReport(hyp, ct, cb, abs(ct - cb), worst, size)
