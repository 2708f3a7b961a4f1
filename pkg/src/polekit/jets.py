"""Second-order truncated Taylor arithmetic in four variables.

A :class:`Jet2` carries a value, a 4-gradient and a symmetric Hessian
(10 independent entries).  Propagating jets through arithmetic gives the
exact value, gradient and Hessian of the composed function at a point,
up to rounding.  This is the single derivative engine of the package:
chart Jacobians/Hessians, worldline velocities and test-form derivatives
all come from here.  Finite differences appear only in tests, as an
independent oracle.
"""

from __future__ import annotations

import math

from .errors import EvaluationError

N_VARS = 4

#: Ordered (a, b) pairs, a <= b, indexing symmetric Hessian storage.
HESS_PAIRS = (
    (0, 0), (0, 1), (0, 2), (0, 3),
    (1, 1), (1, 2), (1, 3),
    (2, 2), (2, 3),
    (3, 3),
)

#: HESS_LOOKUP[a][b] -> flat index into the 10-entry Hessian store.
HESS_LOOKUP = (
    (0, 1, 2, 3),
    (1, 4, 5, 6),
    (2, 5, 7, 8),
    (3, 6, 8, 9),
)

_ZERO4 = (0.0, 0.0, 0.0, 0.0)
_ZERO10 = (0.0,) * 10


def hess_index(a, b):
    """Flat symmetric-storage index for Hessian entry (a, b)."""
    return HESS_LOOKUP[a][b]


class Jet2:
    """Value, gradient and symmetric Hessian of a scalar at a point.

    Instances are immutable; all operations return new jets, so jets can
    be shared freely between threads.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad=_ZERO4, hess=_ZERO10):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(x):
        return Jet2(x)

    @staticmethod
    def seed(x, a):
        """Jet of the coordinate function x^a at the point x."""
        grad = tuple(1.0 if i == a else 0.0 for i in range(N_VARS))
        return Jet2(x[a], grad)

    @staticmethod
    def seed_point(x):
        """Jets of all four coordinate functions at the point x."""
        return tuple(Jet2.seed(x, a) for a in range(N_VARS))

    # -- views ---------------------------------------------------------

    def hess_entry(self, a, b):
        return self.hess[HESS_LOOKUP[a][b]]

    def hessian_rows(self):
        """Hessian as a nested 4x4 tuple (symmetric)."""
        return tuple(
            tuple(self.hess[HESS_LOOKUP[a][b]] for b in range(N_VARS))
            for a in range(N_VARS)
        )

    def __repr__(self):
        return f"Jet2({self.value!r}, grad={self.grad!r}, hess={self.hess!r})"

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value + other, self.grad, self.hess)
        sg, og = self.grad, other.grad
        sh, oh = self.hess, other.hess
        return Jet2(
            self.value + other.value,
            (sg[0] + og[0], sg[1] + og[1], sg[2] + og[2], sg[3] + og[3]),
            (sh[0] + oh[0], sh[1] + oh[1], sh[2] + oh[2], sh[3] + oh[3],
             sh[4] + oh[4], sh[5] + oh[5], sh[6] + oh[6], sh[7] + oh[7],
             sh[8] + oh[8], sh[9] + oh[9]),
        )

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value - other, self.grad, self.hess)
        sg, og = self.grad, other.grad
        sh, oh = self.hess, other.hess
        return Jet2(
            self.value - other.value,
            (sg[0] - og[0], sg[1] - og[1], sg[2] - og[2], sg[3] - og[3]),
            (sh[0] - oh[0], sh[1] - oh[1], sh[2] - oh[2], sh[3] - oh[3],
             sh[4] - oh[4], sh[5] - oh[5], sh[6] - oh[6], sh[7] - oh[7],
             sh[8] - oh[8], sh[9] - oh[9]),
        )

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        g, h = self.grad, self.hess
        return Jet2(
            -self.value,
            (-g[0], -g[1], -g[2], -g[3]),
            (-h[0], -h[1], -h[2], -h[3], -h[4],
             -h[5], -h[6], -h[7], -h[8], -h[9]),
        )

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = float(other)
            g, h = self.grad, self.hess
            return Jet2(
                self.value * c,
                (g[0] * c, g[1] * c, g[2] * c, g[3] * c),
                (h[0] * c, h[1] * c, h[2] * c, h[3] * c, h[4] * c,
                 h[5] * c, h[6] * c, h[7] * c, h[8] * c, h[9] * c),
            )
        fv, gv = self.value, other.value
        f0, f1, f2, f3 = self.grad
        g0, g1, g2, g3 = other.grad
        fh, gh = self.hess, other.hess
        return Jet2(
            fv * gv,
            (fv * g0 + gv * f0, fv * g1 + gv * f1,
             fv * g2 + gv * f2, fv * g3 + gv * f3),
            (fv * gh[0] + gv * fh[0] + 2.0 * f0 * g0,
             fv * gh[1] + gv * fh[1] + f0 * g1 + f1 * g0,
             fv * gh[2] + gv * fh[2] + f0 * g2 + f2 * g0,
             fv * gh[3] + gv * fh[3] + f0 * g3 + f3 * g0,
             fv * gh[4] + gv * fh[4] + 2.0 * f1 * g1,
             fv * gh[5] + gv * fh[5] + f1 * g2 + f2 * g1,
             fv * gh[6] + gv * fh[6] + f1 * g3 + f3 * g1,
             fv * gh[7] + gv * fh[7] + 2.0 * f2 * g2,
             fv * gh[8] + gv * fh[8] + f2 * g3 + f3 * g2,
             fv * gh[9] + gv * fh[9] + 2.0 * f3 * g3),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self * (1.0 / float(other))
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        v = self.value
        if v == 0.0:
            raise EvaluationError("div", "division by a zero value")
        iv = 1.0 / v
        return _chain(self, iv, -iv * iv, 2.0 * iv * iv * iv)

    def __pow__(self, p):
        if isinstance(p, Jet2):
            raise EvaluationError("pow", "exponent must be a constant")
        if float(p).is_integer():
            return self._int_pow(int(p))
        v = self.value
        if v <= 0.0:
            raise EvaluationError(
                "pow", f"non-integer power of non-positive value {v!r}"
            )
        return _chain(
            self, v ** p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0)
        )

    def _int_pow(self, n):
        # Repeated multiplication keeps polynomial jets exact to rounding.
        if n == 0:
            return Jet2(1.0)
        if n < 0:
            return self._int_pow(-n)._reciprocal()
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result


def _chain(u, f0, f1, f2):
    """Jet of f(u) given f, f', f'' at u.value (unary chain rule)."""
    u0, u1, u2, u3 = u.grad
    uh = u.hess
    return Jet2(
        f0,
        (f1 * u0, f1 * u1, f1 * u2, f1 * u3),
        (f1 * uh[0] + f2 * u0 * u0,
         f1 * uh[1] + f2 * u0 * u1,
         f1 * uh[2] + f2 * u0 * u2,
         f1 * uh[3] + f2 * u0 * u3,
         f1 * uh[4] + f2 * u1 * u1,
         f1 * uh[5] + f2 * u1 * u2,
         f1 * uh[6] + f2 * u1 * u3,
         f1 * uh[7] + f2 * u2 * u2,
         f1 * uh[8] + f2 * u2 * u3,
         f1 * uh[9] + f2 * u3 * u3),
    )


def _chain2(u, v, f0, fu, fv, fuu, fuv, fvv):
    """Jet of f(u, v) (binary chain rule)."""
    ug, vg = u.grad, v.grad
    uh, vh = u.hess, v.hess
    grad = tuple(fu * ug[i] + fv * vg[i] for i in range(4))
    hess = tuple(
        fuu * ug[a] * ug[b]
        + fuv * (ug[a] * vg[b] + ug[b] * vg[a])
        + fvv * vg[a] * vg[b]
        + fu * uh[k]
        + fv * vh[k]
        for k, (a, b) in enumerate(HESS_PAIRS)
    )
    return Jet2(f0, grad, hess)


# -- elementary functions ----------------------------------------------


def jsin(u):
    s, c = math.sin(u.value), math.cos(u.value)
    return _chain(u, s, c, -s)


def jcos(u):
    s, c = math.sin(u.value), math.cos(u.value)
    return _chain(u, c, -s, -c)


def jexp(u):
    try:
        e = math.exp(u.value)
    except OverflowError:
        raise EvaluationError("exp", f"overflow at argument {u.value!r}")
    return _chain(u, e, e, e)


def jsqrt(u):
    v = u.value
    if v <= 0.0:
        raise EvaluationError("sqrt", f"argument {v!r} is not positive")
    r = math.sqrt(v)
    return _chain(u, r, 0.5 / r, -0.25 / (r * v))


def jatan2(y, x):
    """Jet of atan2(y, x); smooth away from the origin."""
    xv, yv = x.value, y.value
    r2 = xv * xv + yv * yv
    if r2 == 0.0:
        raise EvaluationError("atan2", "both arguments are zero")
    f0 = math.atan2(yv, xv)
    fy = xv / r2
    fx = -yv / r2
    r4 = r2 * r2
    fyy = -2.0 * xv * yv / r4
    fxx = 2.0 * xv * yv / r4
    fxy = (yv * yv - xv * xv) / r4
    return _chain2(y, x, f0, fy, fx, fyy, fxy, fxx)


_ZERO_JET = Jet2(0.0)


def jbump(u):
    """Smooth compactly supported bump exp(-1/(1-u^2)) on |u|<1, else 0.

    The jet is the exact zero jet outside the support, so test forms
    built from bumps vanish identically (value, gradient and Hessian)
    beyond their box.
    """
    v = u.value
    w = 1.0 - v * v
    if w <= 0.0:
        return _ZERO_JET
    g = -1.0 / w
    if g < -700.0:
        # exp underflows to exactly 0; avoid inf * 0 in the chain terms.
        return _ZERO_JET
    b = math.exp(g)
    iw2 = 1.0 / (w * w)
    g1 = -2.0 * v * iw2
    g2 = -2.0 * iw2 - 8.0 * v * v * iw2 / w
    return _chain(u, b, b * g1, b * (g2 + g1 * g1))


# C^3 polynomial step: 0 for u<=0, 1 for u>=1, 35u^4-84u^5+70u^6-20u^7
# between.  Three continuous derivatives, which is what a once-
# differentiated probe needs when it is then jet-evaluated to second
# order.


def _sstep_poly(v):
    s0 = v ** 4 * (35.0 + v * (-84.0 + v * (70.0 - 20.0 * v)))
    s1 = 140.0 * v ** 3 * (1.0 - v) ** 3
    s2 = 420.0 * v ** 2 * (1.0 - v) ** 2 * (1.0 - 2.0 * v)
    s3 = 840.0 * v * (1.0 - v) * (1.0 - 5.0 * v * (1.0 - v))
    s4 = 840.0 - 10080.0 * v + 25200.0 * v * v - 16800.0 * v ** 3
    return s0, s1, s2, s3, s4


def jsstep(u):
    v = u.value
    if v <= 0.0:
        return _ZERO_JET
    if v >= 1.0:
        return Jet2(1.0)
    s0, s1, s2, _, _ = _sstep_poly(v)
    return _chain(u, s0, s1, s2)


def jsstep_d1(u):
    v = u.value
    if v <= 0.0 or v >= 1.0:
        return _ZERO_JET
    _, s1, s2, s3, _ = _sstep_poly(v)
    return _chain(u, s1, s2, s3)


def jsstep_d2(u):
    v = u.value
    if v <= 0.0 or v >= 1.0:
        return _ZERO_JET
    _, _, s2, s3, s4 = _sstep_poly(v)
    return _chain(u, s2, s3, s4)


def compose(outer, inner):
    """Jet of F(Y(x)) from the jet of F at Y (w.r.t. the Y variables)
    and the jets of the four components of Y (w.r.t. x)."""
    G = outer.grad
    H = outer.hess
    grads = tuple(j.grad for j in inner)
    out_grad = tuple(
        sum(G[b] * grads[b][a] for b in range(4)) for a in range(4)
    )
    out_hess = []
    for k, (a, c) in enumerate(HESS_PAIRS):
        acc = 0.0
        for b in range(4):
            gb = grads[b]
            hb = H[HESS_LOOKUP[b][0]] * grads[0][c] \
                + H[HESS_LOOKUP[b][1]] * grads[1][c] \
                + H[HESS_LOOKUP[b][2]] * grads[2][c] \
                + H[HESS_LOOKUP[b][3]] * grads[3][c]
            acc += gb[a] * hb + G[b] * inner[b].hess[k]
        out_hess.append(acc)
    return Jet2(outer.value, out_grad, tuple(out_hess))
