"""Zero-plane scanning, the neighborhood polynomial and quadratic nondegeneracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import DegeneratePlaneError, HypothesisError
from .metric import Chart, MetricField, Plane, gram, riemann
from .submersion import SubmersionSpec, a_tensor, quotient_metric

ZERO_THRESHOLD = 1e-9
EPS_BOX = 0.1


# scanning ----------------------------------------------------------------------------

@dataclass
class ZeroPlane:
    point: np.ndarray
    plane: Plane
    curv: float
    grad_norm: float


def _orthonormal_frame(gm):
    """``L`` with ``Lᵀ g L = I`` (columns are a g-orthonormal basis)."""
    C = np.linalg.cholesky(gm)
    return np.linalg.inv(C).T


def _frame_tensor(R, L):
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", R.components, L, L, L, L)


def _sec_and_grad(Rh, Y):
    a, b = Y[:, 0], Y[:, 1]
    Mb = np.einsum("ijkl,j,k->il", Rh, b, b)
    Ma = np.einsum("ijkl,j,k->il", Rh, a, a)
    Mb = 0.5 * (Mb + Mb.T)
    Ma = 0.5 * (Ma + Ma.T)
    f = float(a @ Mb @ a)
    G = np.stack([2 * Mb @ a, 2 * Ma @ b], axis=1)
    # Riemannian gradient on the Stiefel manifold (embedded metric)
    S = Y.T @ G
    return f, G - Y @ (0.5 * (S + S.T))


def _retract(Y):
    Q, Rr = np.linalg.qr(Y)
    return Q * np.sign(np.diag(Rr))


def _quotient(Rh, x):
    """sec(a, b) = R(a,b,b,a)/(|a|²|b|² − ⟨a,b⟩²) and its gradient in (a, b)."""
    d = Rh.shape[0]
    a, b = x[:d], x[d:]
    Mb = np.einsum("ijkl,j,k->il", Rh, b, b)
    Ma = np.einsum("ijkl,j,k->il", Rh, a, a)
    Mb = 0.5 * (Mb + Mb.T)
    Ma = 0.5 * (Ma + Ma.T)
    aa, bb, ab = a @ a, b @ b, a @ b
    den = aa * bb - ab * ab
    f = float(a @ Mb @ a) / den
    ga = (2 * Mb @ a - f * (2 * bb * a - 2 * ab * b)) / den
    gb = (2 * Ma @ b - f * (2 * aa * b - 2 * ab * a)) / den
    return f, np.concatenate([ga, gb])


def _descend(Rh, Y, tol, max_iter):
    f, g = _sec_and_grad(Rh, Y)
    step = 1.0
    for _ in range(max_iter):
        gn = float(np.linalg.norm(g))
        if gn < tol:
            break
        step = min(step * 2.0, 1.0)
        while True:
            Yn = _retract(Y - step * g)
            fn, gnew = _sec_and_grad(Rh, Yn)
            if fn <= f - 1e-4 * step * gn * gn or step < 1e-14:
                break
            step *= 0.5
        if step < 1e-14:
            break
        Y, f, g = Yn, fn, gnew
    return Y, f, float(np.linalg.norm(g))


def minimize_plane(Rh, Y0, tol=1e-9, max_iter=5000):
    """Minimize sectional curvature over orthonormal pairs starting from ``Y0``.

    BFGS on the scale-invariant quotient does the bulk of the work; a
    projected-gradient descent on the Stiefel manifold polishes the result
    to the requested gradient norm.
    """
    from scipy.optimize import minimize

    d = Rh.shape[0]
    Y = _retract(Y0)
    res = minimize(lambda x: _quotient(Rh, x), Y.T.ravel(), jac=True, method="BFGS",
                   options={"gtol": 0.1 * tol, "maxiter": 200})
    Y1 = _retract(res.x.reshape(2, d).T)
    if not np.all(np.isfinite(Y1)) or np.linalg.matrix_rank(Y1) < 2:
        Y1 = Y
    return _descend(Rh, Y1, tol, max_iter)


def _canonical(Y):
    """Gauge-fixed orthonormal basis of span(Y): lexicographic sign and ordering via the projector."""
    P = Y @ Y.T
    w, U = np.linalg.eigh(P)
    B = U[:, -2:]
    # rotate within the plane so the first vector has the largest first nonzero component
    out = []
    for k in range(2):
        v = B[:, k]
        idx = np.flatnonzero(np.abs(v) > 1e-12)
        if idx.size and v[idx[0]] < 0:
            v = -v
        out.append(v)
    return np.stack(out, axis=1), P


def find_zero_planes(g, points, threshold=ZERO_THRESHOLD, starts=8, seed=0, polish_tol=1e-9):
    """Minimize sectional curvature over planes at each point; keep the near-flat minima.

    Returns a list of :class:`ZeroPlane` sorted per point by curvature, then
    lexicographically by the plane projector.
    """
    rng = np.random.default_rng(seed)
    found = []
    for p in points:
        p = np.asarray(p, float)
        gm = g(p)
        d = len(p)
        if d < 2:
            continue
        L = _orthonormal_frame(gm)
        Rh = _frame_tensor(riemann(g, p), L)
        candidates = []
        for _ in range(starts):
            Y, f, gn = minimize_plane(Rh, rng.normal(size=(d, 2)), polish_tol)
            if abs(f) < threshold:
                B, P = _canonical(Y)
                candidates.append((f, tuple(np.round(P.ravel(), 8)), B, P, gn))
        candidates.sort(key=lambda c: (round(c[0], 12), c[1]))
        kept = []
        for c in candidates:
            if all(np.abs(c[3] - k[3]).max() > 1e-6 for k in kept):
                kept.append(c)
        for f, _, B, _, gn in kept:
            u, v = L @ B[:, 0], L @ B[:, 1]
            found.append(ZeroPlane(p, Plane.at(p, u, v), float(f), gn))
    return found


def min_sectional(g, p, starts=8, seed=0):
    """Smallest sectional curvature found at ``p`` by the multi-start descent."""
    rng = np.random.default_rng(seed)
    p = np.asarray(p, float)
    L = _orthonormal_frame(g(p))
    Rh = _frame_tensor(riemann(g, p), L)
    return min(minimize_plane(Rh, rng.normal(size=(len(p), 2)))[1] for _ in range(starts))


# neighborhood polynomial ------------------------------------------------------------------

@dataclass
class QuadForm:
    qZZ: float
    qXV: float
    cross: float

    def __call__(self, sigma, tau):
        return sigma * sigma * self.qZZ + 2 * sigma * tau * self.cross + tau * tau * self.qXV

    def matrix(self):
        return np.array([[self.qZZ, self.cross], [self.cross, self.qXV]])


@dataclass
class NeighborhoodPolynomial:
    coefficients: np.ndarray  # c[i, j] multiplies σ^i τ^j
    quadruple: tuple
    low_order_residual: float  # max |constant|, |linear| coefficient

    def __call__(self, sigma, tau):
        sp = sigma ** np.arange(3)
        tp = tau ** np.arange(3)
        return float(sp @ self.coefficients @ tp)

    def quad_form(self):
        c = self.coefficients
        return QuadForm(c[2, 0], c[0, 2], 0.5 * c[1, 1])


def neighborhood_polynomial(g, p, X, W, Z, V, R=None, zero_tol=1e-7):
    """``P(σ,τ) = curv(X+σZ, W+τV)`` by multilinear expansion of R."""
    p = np.asarray(p, float)
    X, W, Z, V = (np.asarray(v, float) for v in (X, W, Z, V))
    gm = g(p)
    if gram(gm, X, W) < 1e-12:
        raise DegeneratePlaneError("X and W are linearly dependent")
    R = R or riemann(g, p)
    T = R.components
    A = [(X, 0), (Z, 1)]
    B = [(W, 0), (V, 1)]
    c = np.zeros((3, 3))
    for a1, i1 in A:
        for b1, j1 in B:
            for b2, j2 in B:
                for a2, i2 in A:
                    c[i1 + i2, j1 + j2] += np.einsum("abcd,a,b,c,d->", T, a1, b1, b2, a2)
    low = max(abs(c[0, 0]), abs(c[1, 0]), abs(c[0, 1]))
    if abs(c[0, 0]) > zero_tol:
        raise HypothesisError(f"span(X, W) is not a zero plane (curv {c[0, 0]:.2e})", residual=abs(c[0, 0]))
    return NeighborhoodPolynomial(c, (X, W, Z, V), float(low))


def quad_form(g, p, X, W, Z, V):
    """Closed-form QuadForm: curv(Z,W), curv(X,V) and R(X,W,V,Z) + R(X,V,W,Z)."""
    R = riemann(g, p)
    return QuadForm(R.curv(Z, W), R.curv(X, V), R(X, W, V, Z) + R(X, V, W, Z))


def quad_nondegeneracy(q):
    """(min over the unit circle > 0, that minimum)."""
    m = float(np.linalg.eigvalsh(q.matrix())[0])
    return m > 0, m


def c2_close_regression(P_old, P_new, eps=EPS_BOX, n=21, tol=1e-6):
    """Scan ``P̃`` on [0,ε]² when ``P``'s quad form is nondegenerate.

    Returns (applicable, min value, offending (σ,τ) or None).
    """
    ok, _ = quad_nondegeneracy(P_old.quad_form())
    if not ok:
        return False, None, None
    grid = np.linspace(0.0, eps, n)
    worst, where = np.inf, None
    for s in grid:
        for t in grid:
            v = P_new(s, t)
            if v < worst:
                worst, where = v, (float(s), float(t))
    return True, float(worst), (where if worst < -tol else None)


# Q(τ) -------------------------------------------------------------------------------

def qtau(curvXW, rWXXV, curvXV, tau):
    return curvXW + 2 * tau * rWXXV + tau * tau * curvXV


def qtau_min(curvXW, rWXXV, curvXV):
    """min over τ of ``curv(X,W) + 2τR(W,X,X,V) + τ² curv(X,V)``."""
    if curvXV <= 0:
        if curvXV == 0 and rWXXV == 0:
            return float(curvXW)
        return -np.inf
    return float(curvXW - rWXXV * rWXXV / curvXV)


# four-way decomposition ---------------------------------------------------------------

@dataclass
class QuadDecomposition:
    total: np.ndarray     # (σ², 2στ, τ²) coefficients of the pushed-forward polynomial
    g_inf: np.ndarray
    h_curv: np.ndarray
    a_cheeger: np.ndarray
    a_pi: np.ndarray
    residual: float
    nondegenerate: bool

    def summands(self):
        return {"g_inf": self.g_inf, "h_curv": self.h_curv, "a_cheeger": self.a_cheeger, "a_pi": self.a_pi}

    def summand_minima(self):
        out = {}
        for k, c in self.summands().items():
            out[k] = quad_nondegeneracy(QuadForm(c[0], c[2], 0.5 * c[1]))[1]
        return out


class QuadSetup:
    """E with ``g_∞``, an abelian H acting with action map, scale ``l``, and π: (E, g_l) → M.

    ``pi_vertical(x)`` spans ker dπ, ``pi_project`` maps to M coordinates,
    ``pi_section`` is an affine section and ``base_chart`` the chart of M.
    """

    def __init__(self, g_inf, group, l, pi_project, pi_vertical, pi_section, base_chart, name="quad"):
        from .deform import cheeger
        if group.act is None or not group.abelian:
            raise HypothesisError("quad decomposition needs an abelian group with an action map")
        self.g_inf = g_inf
        self.group = group
        self.l = l
        self.cheeger = cheeger(g_inf, group, l)
        self.g_l = self.cheeger.metric
        M = quotient_metric(self.g_l, pi_vertical, pi_section, base_chart, name=f"{name}_M")
        self.pi = SubmersionSpec(self.g_l, M, pi_project, pi_vertical, f"{name}_pi")
        self.q = self._cheeger_submersion()
        self.name = name

    def _cheeger_submersion(self):
        G, gi, k = self.group, self.g_inf, self.group.lie_dim
        d = gi.dimension
        B = G.scaled_bi(self.l)
        chart = Chart.box([-np.pi] * k + list(gi.chart.lower), [np.pi] * k + list(gi.chart.upper))

        def total_fn(y):
            Gx = gi.eval(y[k:])
            rows = []
            for i in range(k + d):
                row = []
                for j in range(k + d):
                    if i < k and j < k:
                        row.append(B[i, j] + 0.0 * y[0])
                    elif i >= k and j >= k:
                        row.append(Gx[i - k, j - k] if isinstance(Gx, ad.Jet) else Gx[i - k, j - k] + 0.0 * y[0])
                    else:
                        row.append(0.0 * y[0])
                rows.append(row)
            return ad.array(rows)

        total = MetricField(chart, total_fn, f"Hx{gi.name}", gi.h)

        def project(y):
            return G.act(y[:k], y[k:])

        def vertical(y):
            K = G.killing(y[k:])
            top = -np.eye(k)
            if isinstance(K, ad.Jet):
                return ad.concatenate([K._lift(top), K], axis=0)
            return np.concatenate([top, np.asarray(K, float)], axis=0)

        return SubmersionSpec(total, self.g_l, project, vertical, "cheeger_q")

    def hat(self, x, v):
        """q-horizontal lift ``(k_v, v)`` of ``C(v)`` at ``(0, x)``."""
        return np.concatenate([self.cheeger.lift(x, v), np.asarray(v, float)])


def _coeffs_from_vectors(gm, a_xv, a_zw):
    """(σ², 2στ, τ²) coefficients of |τ a_xv + σ a_zw|²."""
    return np.array([a_zw @ gm @ a_zw, 2 * (a_xv @ gm @ a_zw), a_xv @ gm @ a_xv])


def quad_decomposition(setup, x, X, W, Z, V, threshold=1e-9, orbit_tol=1e-7, zero_tol=1e-7):
    """Split the total quadratic term of the pushed-forward neighborhood polynomial.

    Each A-tensor summand carries the O'Neill factor 3 so that the four
    pieces add up to the quadratic coefficients exactly.
    """
    x = np.asarray(x, float)
    X, W, Z, V = (np.asarray(v, float) for v in (X, W, Z, V))
    G = setup.group
    gi = setup.g_inf(x)
    K = G.killing_at(x)
    orbit = float(np.abs(K.T @ gi @ X).max()) if K.size else 0.0
    if orbit > orbit_tol:
        raise HypothesisError(f"X is not orthogonal to the H-orbits (residual {orbit:.2e})", residual=orbit)
    PH_pi, PV_pi = setup.pi.projectors(x)
    ch = setup.cheeger
    C = {n: ch.reparametrize(x, v) for n, v in zip("XWZV", (X, W, Z, V))}
    for n, v in C.items():
        frac = float(np.linalg.norm(PV_pi @ v))
        if frac > 1e-8:
            raise HypothesisError(f"C({n}) is not π-horizontal (vertical part {frac:.2e})", residual=frac)
    # total quadratic term on M
    y = setup.pi.base_point(x)
    D = setup.pi.differential(x)
    push = {n: D @ v for n, v in C.items()}
    P = neighborhood_polynomial(setup.pi.base, y, push["X"], push["W"], push["Z"], push["V"], zero_tol=zero_tol)
    c = P.coefficients
    total = np.array([c[2, 0], c[1, 1], c[0, 2]])
    # g_∞ quadratic term
    qf = quad_form(setup.g_inf, x, X, W, Z, V)
    s1 = np.array([qf.qZZ, 2 * qf.cross, qf.qXV])
    # H curvature with the scaled biinvariant metric
    kZ, kW = ch.lift(x, Z), ch.lift(x, W)
    s2 = np.array([setup.l ** 2 * G.curv_group(kZ, kW), 0.0, 0.0])
    # Cheeger A-tensor on H × E
    y0 = np.concatenate([np.zeros(G.lie_dim), x])
    hats = {n: setup.hat(x, v) for n, v in zip("XWZV", (X, W, Z, V))}
    gq = setup.q.total(y0)
    AXV = a_tensor(setup.q, y0, hats["X"], hats["V"])
    AZW = a_tensor(setup.q, y0, hats["Z"], hats["W"])
    s3 = 3 * _coeffs_from_vectors(gq, AXV, AZW)
    # A-tensor of π
    gl = setup.g_l(x)
    BXV = a_tensor(setup.pi, x, C["X"], C["V"])
    BZW = a_tensor(setup.pi, x, C["Z"], C["W"])
    s4 = 3 * _coeffs_from_vectors(gl, BXV, BZW)
    resid = float(np.abs(total - (s1 + s2 + s3 + s4)).max())
    ok = quad_nondegeneracy(QuadForm(total[0], total[2], 0.5 * total[1]))[1] > threshold
    return QuadDecomposition(total, s1, s2, s3, s4, resid, bool(ok))


def hat_lift_residual(setup, x, v):
    """|hat(v) − horizontal lift of C(v)| for the Cheeger submersion."""
    y0 = np.concatenate([np.zeros(setup.group.lie_dim), np.asarray(x, float)])
    lift = setup.q.horizontal_lift(y0, setup.cheeger.reparametrize(x, v))
    return float(np.abs(lift - setup.hat(x, v)).max())


# fixtures --------------------------------------------------------------------------

def helicoidal_setup(l=1.0):
    """ℝ⁴ flat, H = SO(2) on (x1,x2), π = quotient by the flow of ∂θ + ∂4."""
    from . import fixtures
    from .deform import rotation
    g = fixtures.flat(4, half_width=5.0)
    G = rotation(4, 0, 1)

    def project(x):
        c, s = ad.cos(x[3]), ad.sin(x[3])
        return ad.stack([c * x[0] + s * x[1], -s * x[0] + c * x[1], x[2]])

    def vertical(x):
        return ad.stack([ad.stack([-x[1]]), ad.stack([x[0]]), ad.stack([0.0 * x[0]]), ad.stack([1.0 + 0.0 * x[0]])])

    def section(y):
        return ad.stack([y[0], y[1], y[2], 0.0 * y[0]])

    chart = Chart.box([-5.0] * 3, [5.0] * 3)
    return QuadSetup(g, G, l, project, vertical, section, chart, "helicoidal")


def torus_setup(l=1.0):
    """Flat T⁴, H = T¹ translating x3, π = quotient by x4 translations."""
    from . import fixtures
    from .deform import translations
    g = fixtures.flat(4, periodic=True)
    G = translations(4, [2])
    chart = Chart.box([0.0] * 3, [2 * np.pi] * 3, {i: 2 * np.pi for i in range(3)})
    return QuadSetup(g, G, l, lambda x: ad.stack([x[0], x[1], x[2]]),
                     lambda x: np.array([[0.0], [0.0], [0.0], [1.0]]),
                     lambda y: ad.stack([y[0], y[1], y[2], 0.0 * y[0]]), chart, "torus")
