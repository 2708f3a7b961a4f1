"""Pairings of worldline sources with compactly supported covector
fields, plus the numerical classification tests built on them.

The pairing numbers are the chart-invariant content of a source:

    monopole:   q * integral  v^a phi_a
    dipole:    -integral  gamma[ab] d_b phi_a
    quadrupole: (1/2) integral  gamma[abc] d_b d_c phi_a

all evaluated along the worldline.  Everything else in this module
(charge extraction, order and closedness probes) is built by feeding
specially shaped covector fields into these three integrals.

Test forms are polynomials times a product of smooth bumps, so they
vanish identically (with all derivatives) outside their box.  Probes
that must be differentiated symbolically (gradient fields, plateau
ramps) use the polynomial step ``sstep`` family instead of the
exponential bump, which keeps every required derivative exact across
the support boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import DomainError
from .jets import Jet2, compose, jbump
from .moments import DipoleComponents, Monopole, QuadrupoleComponents
from .quadrature import integrate

_ZERO_JET = Jet2(0.0)
_ZERO4 = (_ZERO_JET,) * 4


@dataclass(frozen=True)
class Box:
    center: tuple
    half: tuple

    def contains(self, x):
        return all(
            abs(x[i] - self.center[i]) < self.half[i] for i in range(4)
        )

    def corners_grid(self, n=3):
        axes = [
            np.linspace(self.center[i] - self.half[i],
                        self.center[i] + self.half[i], n)
            for i in range(4)
        ]
        pts = []
        for a in axes[0]:
            for b in axes[1]:
                for c in axes[2]:
                    for d in axes[3]:
                        pts.append((float(a), float(b), float(c), float(d)))
        return pts

    def interior_grid(self, n=3):
        axes = [
            np.linspace(self.center[i] - 0.6 * self.half[i],
                        self.center[i] + 0.6 * self.half[i], n)
            for i in range(4)
        ]
        pts = []
        for a in axes[0]:
            for b in axes[1]:
                for c in axes[2]:
                    for d in axes[3]:
                        pts.append((float(a), float(b), float(c), float(d)))
        return pts


@dataclass
class PairingReport:
    value: float
    quadrature_error_estimate: float
    nodes_used: int
    seed: int | None = None


class ProductTestForm:
    """phi_a(x) = poly_a(x) * prod_b bump((x^b - c^b) / w^b)."""

    def __init__(self, polys, box):
        if any(h <= 0 for h in box.half):
            raise DomainError("test form needs positive half-widths")
        self.polys = tuple(polys)
        self.box = box

    def in_support(self, x):
        return self.box.contains(x)

    def _window_jet(self, x):
        w = None
        for b in range(4):
            hw = self.box.half[b]
            u = (x[b] - self.box.center[b]) / hw
            grad = tuple(
                (1.0 / hw) if i == b else 0.0 for i in range(4)
            )
            bj = jbump(Jet2(u, grad))
            w = bj if w is None else w * bj
        return w

    def jets_at(self, x):
        if not self.box.contains(x):
            return _ZERO4
        w = self._window_jet(x)
        seeds = Jet2.seed_point(x)
        out = []
        for p in self.polys:
            if isinstance(p, ex.Const) and p.v == 0.0:
                out.append(_ZERO_JET)
            else:
                out.append(p.eval_jet(seeds) * w)
        return tuple(out)

    def values_at(self, x):
        if not self.box.contains(x):
            return (0.0, 0.0, 0.0, 0.0)
        w = 1.0
        for b in range(4):
            u = (x[b] - self.box.center[b]) / self.box.half[b]
            w *= ex._bump_value(u)
        return tuple(p.eval_value(x) * w for p in self.polys)


class ExprCovector:
    """Four raw expression components; support box is advisory (used
    for bracketing the quadrature, not enforced)."""

    def __init__(self, comps, box=None):
        self.comps = tuple(comps)
        self.box = box

    def in_support(self, x):
        return self.box.contains(x) if self.box is not None else True

    def jets_at(self, x):
        if self.box is not None and not self.box.contains(x):
            return _ZERO4
        seeds = Jet2.seed_point(x)
        return tuple(c.eval_jet(seeds) for c in self.comps)

    def values_at(self, x):
        if self.box is not None and not self.box.contains(x):
            return (0.0, 0.0, 0.0, 0.0)
        return tuple(c.eval_value(x) for c in self.comps)


class ScaledCovector:
    """phi_a = scalar^power * base_a (integer power >= 1)."""

    def __init__(self, scalar, power, base):
        self.scalar = scalar
        self.power = int(power)
        self.base = base

    @property
    def box(self):
        return getattr(self.base, "box", None)

    def in_support(self, x):
        return self.base.in_support(x)

    def jets_at(self, x):
        base_jets = self.base.jets_at(x)
        if all(j is _ZERO_JET for j in base_jets):
            return _ZERO4
        s = self.scalar.eval_jet(Jet2.seed_point(x)) ** self.power
        return tuple(j * s for j in base_jets)

    def values_at(self, x):
        vals = self.base.values_at(x)
        if all(v == 0.0 for v in vals):
            return vals
        s = self.scalar.eval_value(x) ** self.power
        return tuple(v * s for v in vals)


class PulledBackForm:
    """A hatted-chart test form seen from the source chart.

    phi_a(x) = (d hatted^b / d x^a)(x) * hatted_phi_b(hatted(x)); the
    Jacobian factors are symbolic derivatives of the chart components so
    that second jet derivatives of the pullback stay exact.
    """

    def __init__(self, chart, hatted, box):
        self.chart = chart
        self.hatted = hatted
        self.box = box
        self._jac = chart.jacobian_exprs()

    def in_support(self, x):
        try:
            y = self.chart.value_at(x)
        except DomainError:
            return False
        return self.hatted.in_support(y)

    def jets_at(self, x):
        yvals = self.chart.value_at(x)
        if not self.hatted.in_support(yvals):
            return _ZERO4
        seeds = Jet2.seed_point(x)
        Y = tuple(c.eval_jet(seeds) for c in self.chart.forward)
        outer = self.hatted.jets_at(yvals)
        composed = tuple(compose(outer[b], Y) for b in range(4))
        out = []
        for a in range(4):
            acc = None
            for b in range(4):
                d = self._jac[b][a]
                if isinstance(d, ex.Const):
                    if d.v == 0.0:
                        continue
                    term = composed[b] * d.v
                else:
                    term = d.eval_jet(seeds) * composed[b]
                acc = term if acc is None else acc + term
            out.append(acc if acc is not None else _ZERO_JET)
        return tuple(out)

    def values_at(self, x):
        yvals = self.chart.value_at(x)
        if not self.hatted.in_support(yvals):
            return (0.0, 0.0, 0.0, 0.0)
        hv = self.hatted.values_at(yvals)
        out = []
        for a in range(4):
            acc = 0.0
            for b in range(4):
                d = self._jac[b][a]
                if isinstance(d, ex.Const):
                    if d.v == 0.0:
                        continue
                    acc += d.v * hv[b]
                else:
                    acc += d.eval_value(x) * hv[b]
            out.append(acc)
        return tuple(out)


def make_test_form(polys, center, half_widths):
    """Compactly supported covector field from 4 polynomial expressions
    and a support box."""
    box = Box(tuple(float(c) for c in center),
              tuple(float(h) for h in half_widths))
    comps = tuple(ex._coerce(p) for p in polys)
    return ProductTestForm(comps, box)


def pull_back_test_form(hatted, pair, pad=0.1, samples_per_axis=3):
    """Transport a hatted-chart test form to the source chart of
    ``pair``.

    The support is carried conservatively: boundary samples of the
    hatted box are mapped through the inverse chart and their bounding
    box, padded, becomes the source-side box.  Raises
    :class:`DomainError` when the support escapes the chart domain.
    """
    pts = hatted.box.corners_grid(samples_per_axis)
    mapped = []
    for p in pts:
        try:
            mapped.append(pair.inverse.value_at(p))
        except DomainError as err:
            raise DomainError(
                f"test-form support escapes the chart domain: {err}"
            )
    mapped = np.array(mapped)
    lo = mapped.min(axis=0)
    hi = mapped.max(axis=0)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * (1.0 + pad) + 1e-12
    box = Box(tuple(center), tuple(half))
    return PulledBackForm(pair.forward, hatted, box)


# -- quadrature over the worldline parameter -------------------------------


def _support_window(worldline, form, scan=129):
    t0, t1 = worldline.interval
    taus = np.linspace(t0, t1, scan)
    inside = []
    for t in taus:
        try:
            p = worldline.point_at(float(t))
            if form.in_support(p):
                inside.append(float(t))
        except DomainError:
            continue
    if not inside:
        return None
    step = (t1 - t0) / (scan - 1)
    return max(t0, inside[0] - 2 * step), min(t1, inside[-1] + 2 * step)


def _run_pairing(worldline, form, integrand, tol_abs, tol_rel, min_panels):
    window = _support_window(worldline, form)
    if window is None:
        return PairingReport(0.0, 0.0, 0)
    res = integrate(
        integrand, window[0], window[1],
        tol_abs=tol_abs, tol_rel=tol_rel, min_panels=min_panels,
    )
    return PairingReport(res.value, res.error, res.nodes)


def pair_monopole(m, worldline, form, tol_abs=1e-10, tol_rel=1e-10,
                  min_panels=5):
    """q * integral of v^a phi_a along the worldline."""
    q = m.q
    if q == 0.0:
        return PairingReport(0.0, 0.0, 0)

    def integrand(tau):
        point, vel = worldline.eval(tau)
        vals = form.values_at(point)
        return q * (
            vel[0] * vals[0] + vel[1] * vals[1]
            + vel[2] * vals[2] + vel[3] * vals[3]
        )

    return _run_pairing(worldline, form, integrand, tol_abs, tol_rel,
                        min_panels)


def pair_dipole(gamma2, worldline, form, tol_abs=1e-10, tol_rel=1e-10,
                min_panels=5):
    """-integral of gamma[ab] d_b phi_a along the worldline."""
    entries = gamma2.nonzero()
    if not entries:
        return PairingReport(0.0, 0.0, 0)

    def integrand(tau):
        point, _ = worldline.eval(tau)
        jets = form.jets_at(point)
        acc = 0.0
        for a, b, fn in entries:
            acc += fn(tau) * jets[a].grad[b]
        return -acc

    return _run_pairing(worldline, form, integrand, tol_abs, tol_rel,
                        min_panels)


def pair_quadrupole(gamma3, worldline, form, tol_abs=1e-10, tol_rel=1e-10,
                    min_panels=5):
    """(1/2) integral of gamma[abc] d_b d_c phi_a along the worldline."""
    entries = gamma3.nonzero()
    if not entries:
        return PairingReport(0.0, 0.0, 0)

    def integrand(tau):
        point, _ = worldline.eval(tau)
        jets = form.jets_at(point)
        acc = 0.0
        for a, b, c, fn in entries:
            acc += fn(tau) * jets[a].hess_entry(b, c)
        return 0.5 * acc

    return _run_pairing(worldline, form, integrand, tol_abs, tol_rel,
                        min_panels)


@dataclass
class SourceBundle:
    """A monopole/dipole/quadrupole stack carried by one worldline."""

    worldline: object
    monopole: Monopole | None = None
    dipole: DipoleComponents | None = None
    quadrupole: QuadrupoleComponents | None = None

    def parts(self):
        out = []
        if self.monopole is not None:
            out.append(("monopole", self.monopole))
        if self.dipole is not None:
            out.append(("dipole", self.dipole))
        if self.quadrupole is not None:
            out.append(("quadrupole", self.quadrupole))
        return out

    def scale(self, n=17):
        taus = np.linspace(*self.worldline.interval, n)
        s = 0.0
        if self.monopole is not None:
            s = max(s, abs(self.monopole.q))
        if self.dipole is not None:
            s = max(s, self.dipole.scale(taus))
        if self.quadrupole is not None:
            s = max(s, self.quadrupole.scale(taus))
        return s


def pair_bundle(bundle, form, tol_abs=1e-10, tol_rel=1e-10, min_panels=5):
    value = 0.0
    err = 0.0
    nodes = 0
    C = bundle.worldline
    if bundle.monopole is not None:
        r = pair_monopole(bundle.monopole, C, form, tol_abs, tol_rel,
                          min_panels)
        value, err, nodes = value + r.value, err + r.quadrature_error_estimate, nodes + r.nodes_used
    if bundle.dipole is not None:
        r = pair_dipole(bundle.dipole, C, form, tol_abs, tol_rel, min_panels)
        value, err, nodes = value + r.value, err + r.quadrature_error_estimate, nodes + r.nodes_used
    if bundle.quadrupole is not None:
        r = pair_quadrupole(bundle.quadrupole, C, form, tol_abs, tol_rel,
                            min_panels)
        value, err, nodes = value + r.value, err + r.quadrature_error_estimate, nodes + r.nodes_used
    return PairingReport(value, err, nodes)


def pair_adapted_coefficients(z, worldline, form, tol_abs=1e-10,
                              tol_rel=1e-10, min_panels=5):
    """Pairing of a distribution given directly by adapted-basis
    coefficients; the independent cross-check for the coefficient
    dictionary."""
    if not worldline.is_adapted():
        raise DomainError("adapted-basis pairing needs an adapted worldline")

    def integrand(tau):
        point, _ = worldline.eval(tau)
        jets = form.jets_at(point)
        acc = z.charge(tau) * jets[0].value
        for mu in (1, 2, 3):
            acc += z.first_0[mu](tau) * jets[0].grad[mu]
            acc += z.zeroth[mu](tau) * jets[mu].value
            for nu in (1, 2, 3):
                acc += z.first[mu][nu](tau) * jets[nu].grad[mu]
        for mu in (1, 2, 3):
            for nu in range(mu, 4):
                acc += z.second0_at(mu, nu)(tau) * jets[0].hess_entry(mu, nu)
                for rho in (1, 2, 3):
                    acc += (
                        z.second_at(mu, nu, rho)(tau)
                        * jets[rho].hess_entry(mu, nu)
                    )
        return acc

    return _run_pairing(worldline, form, integrand, tol_abs, tol_rel,
                        min_panels)
