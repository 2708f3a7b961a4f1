"""Composite adaptive Gauss-Legendre quadrature (16 nodes per panel).

Integrands here are smooth (chart derivatives along a worldline, bump
windows), so a high-order rule converges fast; the embedded error
estimate per panel is the difference between the one-panel rule and the
sum over its two halves.  A panel is accepted when that difference is
below ``tol_abs * (panel width / total width) + tol_rel * |panel value|``
and the two halves are then stored, so cumulative values stay exactly
consistent with the accepted quadrature.

:class:`CumulativeIntegral` materializes an antiderivative: each stored
segment keeps the Legendre-series coefficients of the integrand, whose
termwise antiderivative evaluates the running integral anywhere inside
the segment with the same error budget as the quadrature itself.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureError

_N = 16
_NODES, _WEIGHTS = leggauss(_N)

# _LEG_AT_NODES[k][i] = L_k(node_i) for k = 0..16 (one above the rule
# order, needed by the antiderivative recurrence).
def _legendre_rows():
    rows = [np.ones(_N), _NODES.copy()]
    for k in range(1, _N + 1):
        rows.append(((2 * k + 1) * _NODES * rows[k] - k * rows[k - 1]) / (k + 1))
    return np.array(rows[: _N + 1])


_LEG_AT_NODES = _legendre_rows()
# Discrete projection (exact for the degree-15 interpolant of the node
# values): c_k = (2k+1)/2 * sum_i w_i f_i L_k(x_i).
_PROJ = ((2 * np.arange(_N) + 1) / 2.0)[:, None] * (_WEIGHTS[None, :] * _LEG_AT_NODES[:_N])

_MAX_SPLITS = 2000


@dataclass
class QuadResult:
    value: float
    error: float
    nodes: int


def _panel_values(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return np.array([f(mid + half * x) for x in _NODES])


def _panel_sum(vals, a, b):
    return 0.5 * (b - a) * float(_WEIGHTS @ vals)


def integrate(f, a, b, tol_abs=1e-10, tol_rel=1e-10, min_panels=4):
    """Adaptively integrate scalar ``f`` over [a, b].

    Raises :class:`QuadratureError` carrying the worst subinterval if the
    panel budget is exhausted before the tolerance is met.
    """
    if b <= a:
        return QuadResult(0.0, 0.0, 0)
    width = b - a
    stack = []
    step = width / max(1, min_panels)
    for i in range(max(1, min_panels)):
        stack.append((a + i * step, min(b, a + (i + 1) * step)))
    total = 0.0
    err = 0.0
    nodes = 0
    splits = 0
    while stack:
        pa, pb = stack.pop()
        coarse = _panel_sum(_panel_values(f, pa, pb), pa, pb)
        pm = 0.5 * (pa + pb)
        fine = _panel_sum(_panel_values(f, pa, pm), pa, pm) + _panel_sum(
            _panel_values(f, pm, pb), pm, pb
        )
        nodes += 3 * _N
        diff = abs(fine - coarse)
        budget = tol_abs * (pb - pa) / width + tol_rel * abs(fine)
        if diff <= budget or (pb - pa) < 1e-14 * width:
            total += fine
            err += diff
            continue
        splits += 1
        if splits > _MAX_SPLITS:
            raise QuadratureError(
                f"no convergence after {splits} splits "
                f"(worst panel [{pa}, {pb}], estimate {diff:.3e})",
                worst_interval=(pa, pb),
            )
        stack.append((pa, pm))
        stack.append((pm, pb))
    return QuadResult(total, err, nodes)


class CumulativeIntegral:
    """F(t) = F(a) + integral_a^t f, for vector-valued smooth f.

    ``f`` maps a float to a length-``dim`` numpy array.  Segments are
    refined until the embedded estimate meets the tolerance; evaluation
    anywhere uses the per-segment Legendre antiderivative.
    """

    def __init__(self, f, a, b, dim, tol_abs=1e-10, tol_rel=1e-10,
                 min_panels=4, label="cumulative integral"):
        if b <= a:
            raise QuadratureError(f"{label}: empty interval [{a}, {b}]")
        self.f = f
        self.a = a
        self.b = b
        self.dim = dim
        self.error = 0.0
        self.nodes = 0
        self._starts = []
        self._segments = []  # (t0, t1, coeffs[_N x dim], F0[dim])
        width = b - a
        step = width / max(1, min_panels)
        pending = [
            (a + i * step, min(b, a + (i + 1) * step))
            for i in range(max(1, min_panels))
        ]
        accepted = []
        splits = 0
        while pending:
            pa, pb = pending.pop()
            va = self._values(pa, pb)
            coarse = 0.5 * (pb - pa) * (_WEIGHTS @ va)
            pm = 0.5 * (pa + pb)
            vl = self._values(pa, pm)
            vr = self._values(pm, pb)
            fine = 0.5 * (pm - pa) * (_WEIGHTS @ vl) + 0.5 * (pb - pm) * (
                _WEIGHTS @ vr
            )
            diff = float(np.max(np.abs(fine - coarse)))
            budget = tol_abs * (pb - pa) / width + tol_rel * float(
                np.max(np.abs(fine))
            )
            if diff <= budget or (pb - pa) < 1e-14 * width:
                accepted.append((pa, pm, vl))
                accepted.append((pm, pb, vr))
                self.error += diff
                continue
            splits += 1
            if splits > _MAX_SPLITS:
                raise QuadratureError(
                    f"{label}: no convergence (worst panel [{pa}, {pb}], "
                    f"estimate {diff:.3e})",
                    worst_interval=(pa, pb),
                )
            pending.append((pa, pm))
            pending.append((pm, pb))
        accepted.sort(key=lambda seg: seg[0])
        running = np.zeros(dim)
        for t0, t1, vals in accepted:
            coeffs = _PROJ @ vals  # (_N, dim)
            self._starts.append(t0)
            self._segments.append((t0, t1, coeffs, running.copy()))
            running = running + (t1 - t0) * coeffs[0]
        self.total = running

    def _values(self, a, b):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        self.nodes += _N
        return np.array([self.f(mid + half * x) for x in _NODES])

    def value(self, t):
        """F(t) - F(a) as a numpy array."""
        if t <= self.a:
            return np.zeros(self.dim)
        if t >= self.b:
            return self.total.copy()
        i = bisect.bisect_right(self._starts, t) - 1
        t0, t1, coeffs, f0 = self._segments[i]
        x = 2.0 * (t - t0) / (t1 - t0) - 1.0
        # Legendre values L_0..L_16 at x, then termwise antiderivatives.
        legs = [1.0, x]
        for k in range(1, _N):
            legs.append(((2 * k + 1) * x * legs[k] - k * legs[k - 1]) / (k + 1))
        acc = (x + 1.0) * coeffs[0]
        for k in range(1, _N):
            lam = (legs[k + 1] - legs[k - 1]) / (2 * k + 1)
            acc = acc + lam * coeffs[k]
        return f0 + 0.5 * (t1 - t0) * acc

    def derivative(self, t):
        return self.f(t)
