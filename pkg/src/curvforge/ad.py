"""Second-order forward-mode differentiation with array-valued jets.

A :class:`Jet` carries a value array together with its gradient and
(optionally) Hessian with respect to ``n`` seed variables.  Derivative axes
are always trailing, so ``grad`` has shape ``val.shape + (n,)`` and ``hess``
has shape ``val.shape + (n, n)``.

The module level functions (:func:`sin`, :func:`exp`, :func:`stack`, ...)
accept jets or plain numbers/arrays, so the same model code can be run on
floats for evaluation and on jets for differentiation.
"""

from __future__ import annotations

import numpy as np


def _order_of(*xs):
    orders = [x.order for x in xs if isinstance(x, Jet)]
    return min(orders) if orders else None


class Jet:
    __slots__ = ("val", "grad", "hess")
    __array_ufunc__ = None

    def __init__(self, val, grad, hess=None):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)

    # construction -----------------------------------------------------
    @classmethod
    def seed(cls, x, order=2):
        """Independent variables ``x`` (1-D) as a jet of shape ``(n,)``."""
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        hess = np.zeros((n, n, n)) if order >= 2 else None
        return cls(x.copy(), np.eye(n), hess)

    @classmethod
    def constant(cls, c, n, order=2):
        c = np.asarray(c, dtype=float)
        hess = np.zeros(c.shape + (n, n)) if order >= 2 else None
        return cls(c, np.zeros(c.shape + (n,)), hess)

    # basic properties -------------------------------------------------
    @property
    def n(self):
        return self.grad.shape[-1]

    @property
    def order(self):
        return 1 if self.hess is None else 2

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    def __len__(self):
        return self.val.shape[0]

    def __repr__(self):
        return f"Jet(shape={self.shape}, n={self.n}, order={self.order})"

    def truncate(self, order):
        if order >= self.order:
            return self
        return Jet(self.val, self.grad, None)

    def d(self, a):
        """Partial derivative along seed ``a``: a jet of one lower order.

        For an order-1 jet the result is a plain array.
        """
        if self.hess is None:
            return self.grad[..., a]
        return Jet(self.grad[..., a], self.hess[..., a, :], None)

    # indexing / shape -------------------------------------------------
    def __getitem__(self, idx):
        if idx is Ellipsis or (isinstance(idx, tuple) and any(i is Ellipsis for i in idx)):
            raise IndexError("Jet indexing does not support Ellipsis")
        hess = None if self.hess is None else self.hess[idx]
        return Jet(self.val[idx], self.grad[idx], hess)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        shape = tuple(shape)
        n = self.n
        hess = None if self.hess is None else self.hess.reshape(shape + (n, n))
        return Jet(self.val.reshape(shape), self.grad.reshape(shape + (n,)), hess)

    def transpose(self, axes=None):
        k = self.ndim
        axes = tuple(reversed(range(k))) if axes is None else tuple(axes)
        hess = None if self.hess is None else self.hess.transpose(axes + (k, k + 1))
        return Jet(self.val.transpose(axes), self.grad.transpose(axes + (k,)), hess)

    @property
    def T(self):
        return self.transpose()

    def sum(self, axis=None):
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis % self.ndim,)
        else:
            axis = tuple(a % self.ndim for a in axis)
        hess = None if self.hess is None else self.hess.sum(axis=axis)
        return Jet(self.val.sum(axis=axis), self.grad.sum(axis=axis), hess)

    # arithmetic -------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.n, self.order)

    def __neg__(self):
        hess = None if self.hess is None else -self.hess
        return Jet(-self.val, -self.grad, hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            val = self.val + c
            grad = np.broadcast_to(self.grad, val.shape + (self.n,))
            hess = None if self.hess is None else np.broadcast_to(self.hess, val.shape + (self.n, self.n))
            return Jet(val, grad, hess)
        order = _order_of(self, other)
        val = self.val + other.val
        grad = _bcast(self.grad, val.shape, 1) + _bcast(other.grad, val.shape, 1)
        hess = None
        if order == 2:
            hess = _bcast(self.hess, val.shape, 2) + _bcast(other.hess, val.shape, 2)
        return Jet(val, grad, hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            hess = None if self.hess is None else self.hess * c[..., None, None]
            return Jet(self.val * c, self.grad * c[..., None], hess)
        order = _order_of(self, other)
        a, b = self, other
        val = a.val * b.val
        grad = a.grad * b.val[..., None] + a.val[..., None] * b.grad
        hess = None
        if order == 2:
            hess = (a.hess * b.val[..., None, None]
                    + a.val[..., None, None] * b.hess
                    + a.grad[..., :, None] * b.grad[..., None, :]
                    + b.grad[..., :, None] * a.grad[..., None, :])
        return Jet(val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.val
        return _chain(self, 1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        p = float(p)
        if p == 0.0:
            return Jet.constant(np.ones(self.shape), self.n, self.order)
        if p.is_integer() and 1 <= p <= 8:
            out = self
            for _ in range(int(p) - 1):
                out = out * self
            return out
        v = self.val
        return _chain(self, v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)


def _bcast(arr, shape, k):
    return np.broadcast_to(arr, tuple(shape) + arr.shape[arr.ndim - k:])


def _chain(x, f0, f1, f2):
    """Apply a scalar function elementwise given its value and two derivatives."""
    grad = f1[..., None] * x.grad
    hess = None
    if x.hess is not None:
        hess = f1[..., None, None] * x.hess + f2[..., None, None] * (x.grad[..., :, None] * x.grad[..., None, :])
    return Jet(f0, grad, hess)


def value(x):
    """Plain value of a jet or array."""
    return x.val if isinstance(x, Jet) else np.asarray(x, dtype=float)


def is_jet(x):
    return isinstance(x, Jet)


# elementwise functions ------------------------------------------------------

def _plain(name, x):
    """Non-jet evaluation; mpmath scalars go to mpmath so precision is kept."""
    if type(x).__module__.startswith("mpmath"):
        import mpmath
        return getattr(mpmath, name)(x)
    return getattr(np, name)(x)


def sin(x):
    if not isinstance(x, Jet):
        return _plain("sin", x)
    s, c = np.sin(x.val), np.cos(x.val)
    return _chain(x, s, c, -s)


def cos(x):
    if not isinstance(x, Jet):
        return _plain("cos", x)
    s, c = np.sin(x.val), np.cos(x.val)
    return _chain(x, c, -s, -c)


def tan(x):
    if not isinstance(x, Jet):
        return _plain("tan", x)
    t = np.tan(x.val)
    sec2 = 1.0 + t * t
    return _chain(x, t, sec2, 2.0 * t * sec2)


def exp(x):
    if not isinstance(x, Jet):
        return _plain("exp", x)
    e = np.exp(x.val)
    return _chain(x, e, e, e)


def log(x):
    if not isinstance(x, Jet):
        return _plain("log", x)
    v = x.val
    return _chain(x, np.log(v), 1.0 / v, -1.0 / v**2)


def sqrt(x):
    if not isinstance(x, Jet):
        return _plain("sqrt", x)
    r = np.sqrt(x.val)
    return _chain(x, r, 0.5 / r, -0.25 / (r * x.val))


def sinh(x):
    if not isinstance(x, Jet):
        return _plain("sinh", x)
    s, c = np.sinh(x.val), np.cosh(x.val)
    return _chain(x, s, c, s)


def cosh(x):
    if not isinstance(x, Jet):
        return _plain("cosh", x)
    s, c = np.sinh(x.val), np.cosh(x.val)
    return _chain(x, c, s, c)


def tanh(x):
    if not isinstance(x, Jet):
        return _plain("tanh", x)
    t = np.tanh(x.val)
    d1 = 1.0 - t * t
    return _chain(x, t, d1, -2.0 * t * d1)


def arctan(x):
    if not isinstance(x, Jet):
        return np.arctan(x)
    v = x.val
    q = 1.0 / (1.0 + v * v)
    return _chain(x, np.arctan(v), q, -2.0 * v * q * q)


def apply(x, f0, f1, f2):
    """Elementwise user function with known derivatives ``f1``, ``f2``."""
    if not isinstance(x, Jet):
        return f0(np.asarray(x, dtype=float))
    v = x.val
    return _chain(x, f0(v), f1(v), f2(v))


def where(cond, a, b):
    """Branch on a boolean mask (computed from values, not differentiated)."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.where(cond, a, b)
    ref = a if isinstance(a, Jet) else b
    a = ref._lift(a) if not isinstance(a, Jet) else a
    b = ref._lift(b) if not isinstance(b, Jet) else b
    order = _order_of(a, b)
    cond = np.asarray(cond, dtype=bool)
    val = np.where(cond, a.val, b.val)
    grad = np.where(cond[..., None], _bcast(a.grad, val.shape, 1), _bcast(b.grad, val.shape, 1))
    hess = None
    if order == 2:
        hess = np.where(cond[..., None, None], _bcast(a.hess, val.shape, 2), _bcast(b.hess, val.shape, 2))
    return Jet(val, grad, hess)


# array constructors ---------------------------------------------------------

def _common(items):
    n, order = None, None
    for it in items:
        if isinstance(it, Jet):
            n = it.n
            order = it.order if order is None else min(order, it.order)
    return n, order


def stack(items, axis=0):
    items = list(items)
    n, order = _common(items)
    if n is None:
        return np.stack([np.asarray(i, dtype=float) for i in items], axis=axis)
    jets = []
    for it in items:
        if isinstance(it, Jet):
            jets.append(it.truncate(order))
        else:
            jets.append(Jet.constant(it, n, order))
    shape = np.broadcast_shapes(*[j.shape for j in jets])
    vals = [np.broadcast_to(j.val, shape) for j in jets]
    grads = [_bcast(j.grad, shape, 1) for j in jets]
    nd = len(shape) + 1
    ax = axis % nd
    hess = None
    if order == 2:
        hess = np.stack([_bcast(j.hess, shape, 2) for j in jets], axis=ax)
    return Jet(np.stack(vals, axis=ax), np.stack(grads, axis=ax), hess)


def concatenate(items, axis=0):
    items = list(items)
    n, order = _common(items)
    if n is None:
        return np.concatenate([np.asarray(i, dtype=float) for i in items], axis=axis)
    jets = [it.truncate(order) if isinstance(it, Jet) else Jet.constant(it, n, order) for it in items]
    ax = axis % jets[0].ndim
    hess = None if order < 2 else np.concatenate([j.hess for j in jets], axis=ax)
    return Jet(np.concatenate([j.val for j in jets], axis=ax),
               np.concatenate([j.grad for j in jets], axis=ax), hess)


def hstack(items):
    return concatenate(items, axis=1)


def array(nested):
    """Build an array (possibly a jet) from nested lists of scalars/jets."""
    if isinstance(nested, (list, tuple)):
        return stack([array(x) for x in nested], axis=0)
    return nested


def einsum2(subs, a, b):
    """Two-operand einsum with the product rule. ``subs`` like ``'ij,jk->ik'``."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.einsum(subs, a, b)
    lhs, out = subs.split("->")
    sa, sb = lhs.split(",")
    used = set(sa + sb + out)
    free = [c for c in "zyxwvutsrqponmlkjihgfedcba" if c not in used]
    z, y = free[0], free[1]
    if not isinstance(b, Jet):
        hess = None if a.hess is None else np.einsum(f"{sa}{z}{y},{sb}->{out}{z}{y}", a.hess, b)
        return Jet(np.einsum(subs, a.val, b), np.einsum(f"{sa}{z},{sb}->{out}{z}", a.grad, b), hess)
    if not isinstance(a, Jet):
        hess = None if b.hess is None else np.einsum(f"{sa},{sb}{z}{y}->{out}{z}{y}", a, b.hess)
        return Jet(np.einsum(subs, a, b.val), np.einsum(f"{sa},{sb}{z}->{out}{z}", a, b.grad), hess)
    order = _order_of(a, b)
    val = np.einsum(subs, a.val, b.val)
    grad = (np.einsum(f"{sa}{z},{sb}->{out}{z}", a.grad, b.val)
            + np.einsum(f"{sa},{sb}{z}->{out}{z}", a.val, b.grad))
    hess = None
    if order == 2:
        hess = (np.einsum(f"{sa}{z}{y},{sb}->{out}{z}{y}", a.hess, b.val)
                + np.einsum(f"{sa},{sb}{z}{y}->{out}{z}{y}", a.val, b.hess)
                + np.einsum(f"{sa}{z},{sb}{y}->{out}{z}{y}", a.grad, b.grad)
                + np.einsum(f"{sa}{y},{sb}{z}->{out}{z}{y}", a.grad, b.grad))
    return Jet(val, grad, hess)


def einsum(subs, *ops):
    """Multi-operand einsum, reduced pairwise left to right."""
    lhs, out = subs.split("->")
    parts = lhs.split(",")
    if len(parts) == 1:
        a = ops[0]
        if not isinstance(a, Jet):
            return np.einsum(subs, a)
        # unary: contract via an all-ones partner of shape ()
        return einsum2(f"{parts[0]},->{out}", a, np.ones(()))
    acc, acc_s = ops[0], parts[0]
    for k in range(1, len(parts)):
        rest = "".join(parts[k + 1:]) + out
        keep = "".join(dict.fromkeys(c for c in acc_s + parts[k] if c in rest))
        if k == len(parts) - 1:
            keep = out
        acc = einsum2(f"{acc_s},{parts[k]}->{keep}", acc, ops[k])
        acc_s = keep
    return acc


def matmul(a, b):
    na = a.ndim if isinstance(a, Jet) else np.ndim(a)
    nb = b.ndim if isinstance(b, Jet) else np.ndim(b)
    subs = {(2, 2): "ij,jk->ik", (2, 1): "ij,j->i", (1, 2): "j,jk->k", (1, 1): "j,j->"}[(na, nb)]
    return einsum2(subs, a, b)


def dot(a, b):
    return matmul(a, b)


def inv(A):
    """Matrix inverse of a 2-D array or jet."""
    if not isinstance(A, Jet):
        return np.linalg.inv(A)
    Ai = np.linalg.inv(A.val)
    dA = np.einsum("ij,jkz,kl->ilz", Ai, A.grad, Ai)
    grad = -dA
    hess = None
    if A.hess is not None:
        # d2(A^-1) = A^-1 (dA_z A^-1 dA_y + dA_y A^-1 dA_z - d2A_zy) A^-1
        t = np.einsum("ijz,jky->ikzy", A.grad, dA)
        hess = (np.einsum("ij,jkzy->ikzy", Ai, t + t.transpose(0, 1, 3, 2))
                - np.einsum("ij,jkzy,kl->ilzy", Ai, A.hess, Ai))
    return Jet(Ai, grad, hess)


def solve(A, b):
    return matmul(inv(A), b)


def outer(a, b):
    return einsum2("i,j->ij", a, b)


def zeros_like_jet(shape, ref):
    if isinstance(ref, Jet):
        return Jet.constant(np.zeros(shape), ref.n, ref.order)
    return np.zeros(shape)


def eye_like(d, ref):
    if isinstance(ref, Jet):
        return Jet.constant(np.eye(d), ref.n, ref.order)
    return np.eye(d)


def derivatives(fn, x, order=2):
    """Value, gradient and Hessian of ``fn`` at ``x`` via one jet pass."""
    out = fn(Jet.seed(x, order))
    if not isinstance(out, Jet):
        out = np.asarray(out, dtype=float)
        n = np.asarray(x).shape[0]
        return out, np.zeros(out.shape + (n,)), np.zeros(out.shape + (n, n))
    return out.val, out.grad, out.hess
