"""Riemannian submersions: H/V splitting, the A-tensor and base-curvature lemmas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from . import fixtures
from .errors import HypothesisError
from .metric import Chart, MetricField, TangentVector, christoffel, covariant_derivative
from .metric import gram, killing_residual, norm, riemann

HORIZONTAL_TOL = 1e-9


class SubmersionSpec:
    """``π: (M, total) → (B, base)`` with an analytic vertical basis.

    ``project`` maps M coordinates to B coordinates and ``vertical`` returns a
    ``(dim M, dim M − dim B)`` matrix whose columns span ker dπ; both must be
    polymorphic in the point so they can be differentiated.
    """

    def __init__(self, total, base, project, vertical, name="submersion"):
        self.total = total
        self.base = base
        self.project = project
        self.vertical = vertical
        self.name = name

    def with_total(self, total, name=None):
        return SubmersionSpec(total, self.base, self.project, self.vertical, name or self.name)

    def differential(self, p):
        p = np.asarray(p, float)
        _, D, _ = ad.derivatives(self.project, p, order=1)
        return D

    def base_point(self, p):
        return np.asarray(ad.value(self.project(np.asarray(p, float))), float)

    def vertical_projector(self, x):
        """Polymorphic ``P_V`` (g-orthogonal projection onto the fibre directions)."""
        G = self.total.eval(x)
        Vb = self.vertical(x)
        if not isinstance(Vb, ad.Jet) and isinstance(G, ad.Jet):
            Vb = G._lift(np.asarray(Vb, float))
        VtG = ad.matmul(Vb.T, G)
        return ad.matmul(ad.matmul(Vb, ad.inv(ad.matmul(VtG, Vb))), VtG)

    def projectors(self, p):
        PV = np.asarray(ad.value(self.vertical_projector(np.asarray(p, float))), float)
        return np.eye(len(p)) - PV, PV

    def horizontal_lift(self, p, b):
        """Horizontal vector at ``p`` mapping to the base vector ``b``."""
        p = np.asarray(p, float)
        D = self.differential(p)
        gi = np.linalg.inv(self.total(p))
        return gi @ D.T @ np.linalg.solve(D @ gi @ D.T, np.asarray(b, float))

    def submersion_residual(self, p, rng, n=5):
        """max | |dπ h|²_B − |h|²_M | over random horizontal ``h``."""
        p = np.asarray(p, float)
        PH, _ = self.projectors(p)
        gM, gB = self.total(p), self.base(self.base_point(p))
        D = self.differential(p)
        worst = 0.0
        for _ in range(n):
            h = PH @ rng.normal(size=len(p))
            dh = D @ h
            worst = max(worst, abs(dh @ gB @ dh - h @ gM @ h))
        return worst


@dataclass
class SplitVector:
    horizontal: TangentVector
    vertical: TangentVector


def split(sub, v):
    p = v.base_point
    sub.total.chart.check(p)
    PH, PV = sub.projectors(p)
    return SplitVector(TangentVector(p, PH @ v.components), TangentVector(p, PV @ v.components))


def _check_horizontal(sub, p, X):
    PH, PV = sub.projectors(p)
    gm = sub.total(p)
    r = norm(gm, PV @ X) / max(norm(gm, X), 1e-300)
    if r > HORIZONTAL_TOL:
        raise HypothesisError(f"vector is not horizontal (vertical fraction {r:.2e})", residual=r)


def _nabla_projected(sub, p, X, E, which):
    """``∇_X (P E)`` with ``E`` extended by constant coordinates."""
    E = np.asarray(E, float)

    def field(x):
        PV = sub.vertical_projector(x)
        if which == "V":
            return ad.matmul(PV, E)
        return E - ad.matmul(PV, E)

    return covariant_derivative(sub.total, p, X, field)


def a_tensor(sub, p, X, E, check=True):
    """O'Neill ``A_X E = H∇_X(VE) + V∇_X(HE)`` for horizontal ``X``."""
    p = np.asarray(p, float)
    X = np.asarray(X, float)
    if check:
        _check_horizontal(sub, p, X)
    PH, PV = sub.projectors(p)
    return PH @ _nabla_projected(sub, p, X, E, "V") + PV @ _nabla_projected(sub, p, X, E, "H")


def a_tensor_general(sub, p, E, F):
    """``A_E F`` for arbitrary ``E`` (A only sees the horizontal part of E)."""
    PH, _ = sub.projectors(p)
    return a_tensor(sub, p, PH @ np.asarray(E, float), F, check=False)


def base_curvature_lift(sub, p, X, Y, Z):
    """Horizontal lift of ``R^B(dπX, dπY)dπZ``."""
    p = np.asarray(p, float)
    D = sub.differential(p)
    q = sub.base_point(p)
    RB = riemann(sub.base, q)
    return sub.horizontal_lift(p, RB.apply(D @ X, D @ Y, D @ Z))


def oneill_check(sub, P):
    """|sec_B(dπP) − sec_M(P) − 3|A_X Y|²| for an orthonormalized horizontal plane."""
    p = P.base_point
    X, Y = P.u.components, P.v.components
    _check_horizontal(sub, p, X)
    _check_horizontal(sub, p, Y)
    gm = sub.total(p)
    X = X / norm(gm, X)
    Y = Y - (X @ gm @ Y) * X
    Y = Y / norm(gm, Y)
    secM = riemann(sub.total, p).curv(X, Y)
    A = a_tensor(sub, p, X, Y)
    D = sub.differential(p)
    q = sub.base_point(p)
    RB = riemann(sub.base, q)
    u, v = D @ X, D @ Y
    secB = RB.curv(u, v) / gram(RB.metric, u, v)
    a2 = float(A @ gm @ A)
    return {"sec_B": secB, "sec_M": secM, "A2": a2, "residual": abs(secB - secM - 3 * a2)}


# abstract lemmas along a curve ---------------------------------------------------

def psi_field(sub, W_fn):
    """``x -> |W^H|`` as a polymorphic function."""

    def psi(x):
        G = sub.total.eval(x)
        W = W_fn(x)
        PV = sub.vertical_projector(x)
        WH = W - ad.matmul(PV, W)
        return ad.sqrt(ad.einsum("i,ij,j->", WH, G, WH))

    return psi


@dataclass
class AbstractATensorRow:
    point: np.ndarray
    psi: float
    lhs: np.ndarray
    rhs: np.ndarray
    residual: float
    asserted: bool


def abstract_a_tensor_check(sub, X_fn, W_fn, points, base_killing=None, psi_floor=1e-3,
                            killing_tol=1e-6):
    """Compare ``A_X W^V`` with ``−(D_X|W^H| / |W^H|) W^H`` along sample points."""
    rows = []
    psi = psi_field(sub, W_fn)
    for p in points:
        p = np.asarray(p, float)
        kres = killing_residual(sub.total, p, W_fn)
        if kres > killing_tol:
            raise HypothesisError(f"W is not Killing on M (residual {kres:.2e})", index=1, residual=kres)
        if base_killing is not None:
            q = sub.base_point(p)
            kb = killing_residual(sub.base, q, base_killing)
            if kb > killing_tol:
                raise HypothesisError(f"dπW is not Killing on B (residual {kb:.2e})", index=2, residual=kb)
        X = np.asarray(ad.value(X_fn(p)), float)
        W = np.asarray(ad.value(W_fn(p)), float)
        PH, PV = sub.projectors(p)
        lhs = a_tensor(sub, p, X, PV @ W)
        val, grad, _ = ad.derivatives(psi, p, order=1)
        ps = float(val)
        if ps > 0:
            rhs = -(grad @ X) / ps * (PH @ W)
        else:
            rhs = np.zeros_like(W)
        gm = sub.total(p)
        res = norm(gm, lhs - rhs)
        rows.append(AbstractATensorRow(p, ps, lhs, rhs, res, ps > psi_floor))
    return rows


@dataclass
class BaseJacobiRow:
    point: np.ndarray
    psi: float
    jacobi_brute: np.ndarray    # R^B(W^H, X)X
    jacobi_formula: np.ndarray  # −(ψ″/ψ) W^H
    second_brute: np.ndarray    # R^B(X, W^H)W^H
    second_formula: np.ndarray  # −ψ ∇_X grad ψ


def base_jacobi_tensors(base, X_fn, K_fn, points, psi_floor=0.0):
    """Evaluate the two base curvature lemmas along a geodesic with Killing ``K``."""
    rows = []

    def psi(x):
        G = base.eval(x)
        K = K_fn(x)
        return ad.sqrt(ad.einsum("i,ij,j->", K, G, K))

    for p in points:
        p = np.asarray(p, float)
        X = np.asarray(ad.value(X_fn(p)), float)
        K = np.asarray(ad.value(K_fn(p)), float)
        val, grad, hess = ad.derivatives(psi, p, order=2)
        ps = float(val)
        if ps <= psi_floor:
            raise HypothesisError(f"psi vanishes at {p}", residual=ps)
        gam = christoffel(base, p)
        hessian = hess - np.einsum("kab,k->ab", gam, grad)
        psi2 = X @ hessian @ X
        R = riemann(base, p)
        gm = base(p)
        gi = np.linalg.inv(gm)

        # ∇_X grad ψ = g^{-1} Hess(X, ·)
        nabla_grad = gi @ (hessian @ X)
        rows.append(BaseJacobiRow(p, ps, R.apply(K, X, X), -(psi2 / ps) * K,
                                  R.apply(X, K, K), -ps * nabla_grad))
    return rows


# fixtures -----------------------------------------------------------------------------

def _hopf():
    total = fixtures.metric("s3_round")
    base = fixtures.metric("s2_half")

    def project(x):
        return ad.stack([x[0], x[1] - x[2]])

    def vertical(x):
        return np.array([[0.0], [1.0], [1.0]])

    return SubmersionSpec(total, base, project, vertical, "hopf")


def _product_twist():
    total = fixtures.metric("product_twist")
    base = fixtures.metric("flat_r2")
    return SubmersionSpec(total, base, lambda x: ad.stack([x[0], x[1]]),
                          lambda x: np.array([[0.0], [0.0], [1.0]]), "product_twist")


def _product():
    total = fixtures.metric("flat_r3")
    base = fixtures.metric("flat_r2")
    return SubmersionSpec(total, base, lambda x: ad.stack([x[0], x[1]]),
                          lambda x: np.array([[0.0], [0.0], [1.0]]), "product")


def _flat_bundle():
    total = fixtures.metric("flat_t3")
    base = fixtures.metric("flat_t2")
    return SubmersionSpec(total, base, lambda x: ad.stack([x[0], x[1]]),
                          lambda x: np.array([[0.0], [0.0], [1.0]]), "flat_bundle")


def warped_s2_base():
    """Quotient of S²×S¹ by the diagonal circle: dr² + sin²r/(1+sin²r) dφ²."""
    chart = Chart.box([0.1, 0.0], [np.pi - 0.1, 2 * np.pi], {1: 2 * np.pi})

    def fn(x):
        s2 = ad.sin(x[0]) ** 2
        return ad.array([[1.0, 0.0], [0.0, s2 / (1.0 + s2)]])

    return MetricField(chart, fn, "warped_s2_base")


def _warped_s2():
    """S²×S¹ → S² quotient by the diagonal rotation ∂θ + ∂z."""
    total = fixtures.metric("s2xs1")
    return SubmersionSpec(total, warped_s2_base(), lambda x: ad.stack([x[0], x[1] - x[2]]),
                          lambda x: np.array([[0.0], [1.0], [1.0]]), "warped_s2")


SUBMERSIONS = {
    "hopf": _hopf,
    "product_twist": _product_twist,
    "product": _product,
    "flat_bundle": _flat_bundle,
    "warped_s2": _warped_s2,
}


def submersion(name):
    try:
        return SUBMERSIONS[name]()
    except KeyError:
        raise KeyError(f"unknown submersion fixture {name!r}") from None


def hopf_vertical(x):
    """Hopf Killing field ∂ξ1 + ∂ξ2 (unit length on the round sphere)."""
    return np.array([0.0, 1.0, 1.0])


def hopf_horizontal(x):
    """An orthonormal horizontal pair at ``x`` for the Hopf fixture."""
    eta = float(x[0])
    s, c = np.sin(eta), np.cos(eta)
    return np.array([1.0, 0.0, 0.0]), np.array([0.0, c / s, -s / c])


def quotient_metric(total, vertical, section, chart, section_jacobian=None, name="quotient"):
    """Metric on the base of ``total`` modulo the fibres spanned by ``vertical``.

    ``section`` maps base coordinates to total-space coordinates with
    ``π ∘ section = id``; its Jacobian defaults to the one at the chart centre
    (exact for affine sections).  ``g_B = Dsᵀ (G − G P_V) Ds``.
    """
    if section_jacobian is None:
        centre = 0.5 * (np.asarray(chart.lower) + np.asarray(chart.upper))
        _, Ds0, _ = ad.derivatives(section, centre, order=1)
        section_jacobian = lambda y: Ds0

    def fn(y):
        x = section(y)
        G = total.eval(x)
        Vb = vertical(x)
        if not isinstance(Vb, ad.Jet) and isinstance(G, ad.Jet):
            Vb = G._lift(np.asarray(Vb, float))
        GV = ad.matmul(G, Vb)
        GH = G - ad.matmul(ad.matmul(GV, ad.inv(ad.matmul(Vb.T, GV))), GV.T)
        Ds = section_jacobian(y)
        return ad.matmul(ad.matmul(Ds.T, GH), Ds)

    return MetricField(chart, fn, name, total.h)
