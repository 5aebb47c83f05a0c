"""Cartan structure equations for orthonormal (co)frames.

Frames are given as polymorphic functions ``x -> E`` with ``E[:, i]`` the
coordinate components of ``E_i``; the coframe is ``θ = E⁻¹`` (row ``i`` is
``θ^i``).  Conventions:

    dθ^i = ½ Σ b^i_{jk} θ^j∧θ^k,   a^i_{jk} = ½(b^i_{jk} + b^j_{ki} − b^k_{ij}),
    ω^i_j = Σ_k a^i_{jk} θ^k,       Ω^i_j = dω^i_j + Σ_k ω^i_k∧ω^k_j,

with ``Ω^i_j(X,Y) = g(R(X,Y)E_j, E_i)`` and ``ω^i_j(X) = g(∇_X E_j, E_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import ad
from .errors import HypothesisError
from .metric import MetricField, riemann
from . import fixtures


class Coframe:
    def __init__(self, metric, frame_fn, name="frame"):
        self.metric = metric
        self._frame = frame_fn
        self.name = name

    def frame(self, x):
        return self._frame(x)

    def frame_at(self, p):
        return np.asarray(ad.value(self._frame(np.asarray(p, float))), float)

    def coframe_at(self, p):
        return np.linalg.inv(self.frame_at(p))

    def orthonormality_residual(self, p):
        E = self.frame_at(p)
        return float(np.abs(E.T @ self.metric(p) @ E - np.eye(len(p))).max())

    def duality_residual(self, p):
        E = self.frame_at(p)
        return float(np.abs(self.coframe_at(p) @ E - np.eye(len(p))).max())


def gram_schmidt_frame(g, name=None):
    """Orthonormalize the coordinate frame with respect to ``g``."""

    def fn(x):
        G = g.eval(x)
        d = g.dimension
        vecs = []
        for i in range(d):
            v = np.eye(d)[i]
            for u in vecs:
                v = v - ad.einsum("i,ij,j->", u, G, v) * u
            v = v / ad.sqrt(ad.einsum("i,ij,j->", v, G, v))
            vecs.append(v)
        return ad.stack(vecs, axis=1)

    return Coframe(g, fn, name or f"gs_{g.name}")


def coordinate_frame(g):
    d = g.dimension
    return Coframe(g, lambda x: np.eye(d), f"coord_{g.name}")


def polar_coframe():
    """{dr, r dθ} on the polar flat chart."""
    g = fixtures.metric("polar_flat")

    def fn(x):
        return ad.array([[1.0, 0.0], [0.0, 1.0 / x[0]]])

    return Coframe(g, fn, "polar")


def _quat_units(q):
    a, b, c, d = q[0], q[1], q[2], q[3]
    qi = ad.stack([-b, a, d, -c])
    qj = ad.stack([-c, -d, a, b])
    qk = ad.stack([-d, c, -b, a])
    return [qi, qj, qk]


def su2_left_invariant():
    """Left-invariant frame q·i, q·j, q·k on unit S³ (Hopf coordinates)."""
    g = fixtures.metric("s3_round")

    def fn(x):
        J = fixtures.hopf_embedding_jacobian(x)
        q = fixtures.hopf_embedding(x)
        G = ad.matmul(J.T, J)
        Jp = ad.matmul(ad.inv(G), J.T)
        cols = [ad.matmul(Jp, u) for u in _quat_units(q)]
        return ad.stack(cols, axis=1)

    return Coframe(g, fn, "su2_left")


def quaternion_structure_constants():
    """c[i,j,k] with [e_j, e_k] = c[i,j,k] e_i for e = (i, j, k) in the quaternions."""
    units = {
        0: np.array([0, 1, 0, 0.0]), 1: np.array([0, 0, 1, 0.0]), 2: np.array([0, 0, 0, 1.0]),
    }

    def qmul(p, q):
        a1, b1, c1, d1 = p
        a2, b2, c2, d2 = q
        return np.array([a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                         a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                         a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                         a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2])

    c = np.zeros((3, 3, 3))
    for j in range(3):
        for k in range(3):
            comm = qmul(units[j], units[k]) - qmul(units[k], units[j])
            c[:, j, k] = comm[1:]
    return c


# structure equations ----------------------------------------------------------

@dataclass
class StructureCoefficients:
    b: np.ndarray
    a: np.ndarray

    def antisymmetry_residuals(self):
        return {"b": float(np.abs(self.b + self.b.transpose(0, 2, 1)).max()),
                "a": float(np.abs(self.a + self.a.transpose(1, 0, 2)).max())}


def _structure_jets(cf, p):
    """Order-1 jets of ``b``, ``a`` and the coordinate connection forms ``ω``."""
    p = np.asarray(p, float)
    cf.metric.chart.check(p, cf.metric.stencil_width)
    E2 = cf.frame(ad.Jet.seed(p, 2))
    if not isinstance(E2, ad.Jet):
        E2 = ad.Jet.constant(E2, len(p), 2)
    Th2 = ad.inv(E2)
    d = len(p)
    dTh = ad.stack([Th2.d(a) for a in range(d)], axis=2)  # [i,b,a] = ∂_a θ^i_b
    E1, Th1 = E2.truncate(1), Th2.truncate(1)
    b = ad.einsum("iba,aj,bk->ijk", dTh, E1, E1) - ad.einsum("iba,bj,ak->ijk", dTh, E1, E1)
    a = 0.5 * (b + ad.einsum("jki->ijk", b) - ad.einsum("kij->ijk", b))
    omega = ad.einsum("ijk,kc->ijc", a, Th1)
    return b, a, omega, E1, Th1


def _check_orthonormal(cf, p, tol=1e-9):
    r = cf.orthonormality_residual(p)
    if r > tol:
        raise HypothesisError(f"frame not orthonormal at {p} (residual {r:.2e})", residual=r)


def structure_coefficients(cf, p):
    _check_orthonormal(cf, p)
    b, a, _, _, _ = _structure_jets(cf, p)
    return StructureCoefficients(b.val, a.val)


def exterior_derivative_fd(form_fn, p, h=1e-5):
    """``dα[a,b]`` of a 1-form given as ``x -> α_a(x)``, by central differences."""
    p = np.asarray(p, float)
    d = len(p)
    D = np.zeros((d, d))  # D[b,a] = ∂_a α_b
    for a in range(d):
        e = np.zeros(d)
        e[a] = h
        D[:, a] = (form_fn(p + e) - form_fn(p - e)) / (2 * h)
    return D.T - D  # dα(∂_a, ∂_b) = ∂_a α_b − ∂_b α_a


def structure_reconstruction_residual(cf, p, h=1e-5):
    """Compare ½ b θ∧θ with a finite-difference dθ."""
    sc = structure_coefficients(cf, p)
    Th = cf.coframe_at(p)
    worst = 0.0
    for i in range(len(p)):
        fd = exterior_derivative_fd(lambda x: cf.coframe_at(x)[i], p, h)
        # (½ b^i_{jk} θ^j∧θ^k)(∂_a,∂_b) = b^i_{jk} θ^j_a θ^k_b
        rec = np.einsum("jk,ja,kb->ab", sc.b[i], Th, Th)
        worst = max(worst, float(np.abs(fd - rec).max()))
    return worst


@dataclass
class CartanForms:
    omega: np.ndarray      # ω[i,j,c], coordinate covector components
    Omega: np.ndarray      # Ω[i,j,a,b], coordinate 2-form components
    omega_frame: np.ndarray  # ω^i_j(E_k)
    Omega_frame: np.ndarray  # Ω^i_j(E_k, E_l)

    def riemann_frame(self):
        """``R(E_k,E_l,E_j,E_i)`` arranged as ``R[k,l,j,i]``."""
        return np.einsum("ijkl->klji", self.Omega_frame)


def connection_and_curvature_forms(cf, p):
    _check_orthonormal(cf, p)
    _, _, omega, E1, _ = _structure_jets(cf, p)
    d = len(p)
    dom = np.stack([omega.d(a) for a in range(d)], axis=-1)  # [i,j,b,a] = ∂_a ω_{ijb}
    w = omega.val
    Omega = (np.einsum("ijba->ijab", dom) - dom
             + np.einsum("ika,kjb->ijab", w, w) - np.einsum("ikb,kja->ijab", w, w))
    E = E1.val
    return CartanForms(w, Omega, np.einsum("ijc,ck->ijk", w, E),
                       np.einsum("ijab,ak,bl->ijkl", Omega, E, E))


def cross_oracle_residual(cf, p):
    """max |Ω-based frame curvature − metric-core Riemann in the frame|."""
    forms = connection_and_curvature_forms(cf, p)
    R = riemann(cf.metric, p).components
    E = cf.frame_at(p)
    Rf = np.einsum("abcd,ak,bl,cj,di->klji", R, E, E, E, E)
    return float(np.abs(forms.riemann_frame() - Rf).max())


# C¹ perturbation -------------------------------------------------------------------

@dataclass
class CoframeRescaling:
    """θ̃^i = φ^i θ^i with dφ^i = ψ^i θ¹ and dψ^i = λ^i θ¹ (index 0 here)."""

    phi: list
    psi: list
    lam: list


def rescaled_metric(cf, r):
    g = cf.metric

    def fn(x):
        E = cf.frame(x)
        Th = ad.inv(E) if isinstance(E, ad.Jet) else np.linalg.inv(E)
        d = g.dimension
        out = None
        for i in range(d):
            th = Th[i]
            term = (r.phi[i](x) ** 2) * ad.outer(th, th)
            out = term if out is None else out + term
        return out

    return MetricField(g.chart, fn, f"{g.name}_rescaled", g.h)


def rescaled_coframe(cf, r):
    gt = rescaled_metric(cf, r)

    def fn(x):
        E = cf.frame(x)
        scale = ad.stack([1.0 / r.phi[i](x) for i in range(gt.dimension)])
        return E * scale  # column i divided by φ^i

    return Coframe(gt, fn, f"{cf.name}_rescaled")


def rescaling_hypothesis_residual(cf, r, p):
    p = np.asarray(p, float)
    th1 = cf.coframe_at(p)[0]
    worst = 0.0
    for i in range(len(p)):
        _, dphi, _ = ad.derivatives(r.phi[i], p)
        _, dpsi, _ = ad.derivatives(r.psi[i], p)
        psi = float(ad.value(r.psi[i](p)))
        lam = float(ad.value(r.lam[i](p)))
        worst = max(worst, float(np.abs(dphi - psi * th1).max()), float(np.abs(dpsi - lam * th1).max()))
    return worst


@dataclass
class PerturbationReport:
    deltas: dict           # (i,j,k,l) -> max |R̃ − R| over the sample
    exempt: set            # index tuples with two or more entries equal to the θ¹ index
    eps_term: float        # max{|ψ^i|, |1 − φ^i|}
    conn_term: float       # max{|ω^i_j|, |da^i_{jk}|}
    fitted_constant: float

    def max_nonexempt(self):
        vals = [v for k, v in self.deltas.items() if k not in self.exempt]
        return max(vals) if vals else 0.0


def c1_perturbation_report(cf, r, sample, eps=None, tol=1e-7):
    sample = [np.asarray(p, float) for p in sample]
    d = cf.metric.dimension
    for p in sample:
        res = rescaling_hypothesis_residual(cf, r, p)
        if res > tol:
            raise HypothesisError(f"dφ = ψθ¹ hypothesis violated at {p} (residual {res:.2e})", residual=res)
    cft = rescaled_coframe(cf, r)
    deltas = {idx: 0.0 for idx in product(range(d), repeat=4)}
    eps_term, conn_term = 0.0, 0.0
    for p in sample:
        R0 = connection_and_curvature_forms(cf, p).riemann_frame()
        R1 = connection_and_curvature_forms(cft, p).riemann_frame()
        diff = np.abs(R1 - R0)
        for idx in deltas:
            deltas[idx] = max(deltas[idx], float(diff[idx]))
        for i in range(d):
            eps_term = max(eps_term, abs(float(ad.value(r.psi[i](p)))), abs(1 - float(ad.value(r.phi[i](p)))))
        _, a, omega, _, _ = _structure_jets(cf, p)
        conn_term = max(conn_term, float(np.abs(omega.val).max()), float(np.abs(a.grad).max()))
    if eps is not None and eps_term > eps:
        raise HypothesisError(f"rescaling not C¹-small: {eps_term:.3e} > {eps:.3e}", residual=eps_term)
    exempt = {idx for idx in deltas if sum(1 for t in idx if t == 0) >= 2}
    denom = eps_term * max(conn_term, 1e-300)
    nonex = [v for k, v in deltas.items() if k not in exempt]
    fitted = (max(nonex) / denom) if nonex and denom > 0 else 0.0
    return PerturbationReport(deltas, exempt, eps_term, conn_term, fitted)
