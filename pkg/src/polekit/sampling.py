"""Seeded random generators shared by the CLI jobs and the test suite.

Everything here is driven by a numpy Generator so that a recorded seed
reproduces a run bit for bit.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import expr as ex
from .charts import ChartPair, linear_chart
from .moments import DipoleComponents, QuadrupoleComponents, quadrupole_basis
from .pairing import Box, ProductTestForm
from .taufn import TauFn


def rng_from_seed(seed):
    return np.random.default_rng(int(seed))


def poly_tau_expr(rng, degree=2, scale=1.0):
    """Random polynomial in tau with uniform coefficients."""
    e = ex.const(scale * rng.uniform(-1, 1))
    for k in range(1, degree + 1):
        c = scale * rng.uniform(-1, 1)
        e = ex.add(e, ex.mul(ex.const(c), ex.Pow(ex.Var(0), float(k))))
    return e


def random_dipole(rng, degree=2, scale=1.0):
    """Antisymmetric dipole components with polynomial tau dependence."""
    entries = {}
    for a in range(4):
        for b in range(a + 1, 4):
            p = poly_tau_expr(rng, degree, scale)
            entries[(a, b)] = p
            entries[(b, a)] = ex.neg(p)
    return DipoleComponents.from_dict(entries)


def random_quadrupole(rng, degree=2, scale=1.0, directions=5):
    """Valid quadrupole components: a few random directions in the
    20-dimensional constraint null space, each with a polynomial
    coefficient.

    The coefficient polynomials are shared across all 64 entries, so
    the whole tensor is evaluated once per tau and cached; entry
    functions just index into it.
    """
    basis = quadrupole_basis()
    picks = rng.choice(len(basis), size=min(directions, len(basis)),
                       replace=False)
    tensors = np.array([basis[i] for i in picks])
    coeffs = [TauFn.from_expr(poly_tau_expr(rng, degree, scale))
              for _ in picks]
    combo = _BasisCombo(tensors, coeffs)
    grid = [
        [[combo.entry(a, b, c) for c in range(4)] for b in range(4)]
        for a in range(4)
    ]
    return QuadrupoleComponents(grid)


class _BasisCombo:
    """sum_i f_i(tau) * B_i with one cached evaluation per tau."""

    def __init__(self, tensors, coeffs):
        self.tensors = tensors
        self.coeffs = coeffs
        self._cache = lru_cache(maxsize=4096)(self._tensor)
        self._dcache = lru_cache(maxsize=4096)(self._dtensor)
        self._d2cache = lru_cache(maxsize=4096)(self._d2tensor)

    def _tensor(self, tau):
        w = np.array([f(tau) for f in self.coeffs])
        return np.einsum("i,iabc->abc", w, self.tensors)

    def _dtensor(self, tau):
        w = np.array([f.deriv(tau) for f in self.coeffs])
        return np.einsum("i,iabc->abc", w, self.tensors)

    def _d2tensor(self, tau):
        w = np.array([f.deriv2(tau) for f in self.coeffs])
        return np.einsum("i,iabc->abc", w, self.tensors)

    def entry(self, a, b, c):
        if float(np.max(np.abs(self.tensors[:, a, b, c]))) < 1e-300:
            return TauFn.constant(0.0)
        return TauFn(
            lambda t: float(self._cache(t)[a, b, c]),
            lambda t: float(self._dcache(t)[a, b, c]),
            lambda t: float(self._d2cache(t)[a, b, c]),
        )


def random_antisym_poly_grid(rng, degree=2, scale=1.0):
    """Antisymmetric 4x4 grid of polynomial TauFns (embedding input)."""
    grid = [[TauFn.constant(0.0) for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(a + 1, 4):
            p = poly_tau_expr(rng, degree, scale)
            grid[a][b] = TauFn.from_expr(p)
            grid[b][a] = TauFn.from_expr(ex.neg(p))
    return grid


def random_linear_pair(rng, spread=0.35):
    """A well-conditioned random linear chart with its exact inverse."""
    while True:
        M = np.eye(4) + spread * rng.uniform(-1, 1, (4, 4))
        if abs(np.linalg.det(M)) > 0.3:
            break
    fw = linear_chart(M, "random linear")
    bw = linear_chart(np.linalg.inv(M), "random linear inverse")
    return ChartPair(fw, bw)


def random_test_form(rng, center, half_widths, amplitude=1.0):
    """Product test form with random affine component polynomials."""
    polys = []
    for _ in range(4):
        e = ex.const(amplitude * rng.uniform(0.4, 1.6) * rng.choice([-1, 1]))
        for b in range(4):
            c = amplitude * rng.uniform(-1, 1) / max(half_widths[b], 1e-9)
            e = ex.add(
                e,
                ex.mul(
                    ex.const(c), ex.sub(ex.Var(b), ex.const(center[b]))
                ),
            )
        polys.append(e)
    return ProductTestForm(
        tuple(polys),
        Box(tuple(float(c) for c in center),
            tuple(float(h) for h in half_widths)),
    )


def random_test_form_along(rng, worldline, margin=0.2,
                           rel_width=(0.08, 0.2), chart=None,
                           space_scale=1.0):
    """A test form whose box sits on the worldline image, away from the
    parameter interval ends (pairing identities integrate by parts in
    tau, so probes must vanish at the interval boundary).

    The time half-width scales with the parameter interval; spatial
    half-widths scale with ``space_scale`` so boxes stay small compared
    to chart features (axis distance, branch cuts)."""
    t0, t1 = worldline.interval
    length = t1 - t0
    tc = rng.uniform(t0 + margin * length, t1 - margin * length)
    point = worldline.point_at(float(tc))
    if chart is not None:
        point = chart.value_at(point)
    tw = float(rng.uniform(rel_width[0], rel_width[1]) * length)
    sw = rng.uniform(rel_width[0], rel_width[1], 3) * space_scale
    widths = (tw, float(sw[0]), float(sw[1]), float(sw[2]))
    return random_test_form(rng, point, widths)
