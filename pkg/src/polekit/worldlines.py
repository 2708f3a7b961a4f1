"""Parametrized worldlines and their reparametrizations.

Worldlines are expression trees in one variable (``tau``, stored as
variable 0), not sample arrays: the transport law needs the exact
velocity at arbitrary quadrature nodes.  Regularity (a nowhere-vanishing
velocity) is checked at sample nodes only, matching how the curve is
consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import Const, Expr, Var
from .jets import Jet2
from .taufn import TauFn


def _as_tau_expr(obj):
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (int, float)):
        return Const(float(obj))
    raise TypeError(f"worldline components must be Expr or numbers, got {obj!r}")


@dataclass(frozen=True)
class Worldline:
    components: tuple  # four Expr in tau
    interval: tuple  # (tau0, tau1), tau0 < tau1

    def __post_init__(self):
        t0, t1 = self.interval
        if not t0 < t1:
            raise DomainError(f"empty parameter interval [{t0}, {t1}]")

    @staticmethod
    def from_exprs(components, interval):
        comps = tuple(_as_tau_expr(c) for c in components)
        if len(comps) != 4:
            raise DomainError("a worldline needs exactly 4 components")
        return Worldline(comps, (float(interval[0]), float(interval[1])))

    @staticmethod
    def static_at(position, interval):
        """Worldline sitting at a fixed spatial point, x0 = tau."""
        comps = (Var(0),) + tuple(Const(float(p)) for p in position)
        return Worldline(comps, (float(interval[0]), float(interval[1])))

    def _check_tau(self, tau):
        t0, t1 = self.interval
        if not (t0 <= tau <= t1):
            raise DomainError(
                f"parameter {tau} outside the interval [{t0}, {t1}]"
            )

    def eval(self, tau):
        """(point, velocity) from one jet pass."""
        self._check_tau(tau)
        seeds = Jet2.seed_point((float(tau), 0.0, 0.0, 0.0))
        jlist = [c.eval_jet(seeds) for c in self.components]
        point = tuple(j.value for j in jlist)
        velocity = tuple(j.grad[0] for j in jlist)
        return point, velocity

    def point_at(self, tau):
        self._check_tau(tau)
        env = (float(tau), 0.0, 0.0, 0.0)
        return tuple(c.eval_value(env) for c in self.components)

    def velocity_at(self, tau):
        return self.eval(tau)[1]

    def acceleration_at(self, tau):
        self._check_tau(tau)
        seeds = Jet2.seed_point((float(tau), 0.0, 0.0, 0.0))
        return tuple(c.eval_jet(seeds).hess[0] for c in self.components)

    def velocity_taufn(self, a):
        """Component a of the velocity as a TauFn (second derivative
        of the curve backs its derivative)."""
        return TauFn(
            lambda t: self.eval(t)[1][a],
            lambda t: self.acceleration_at(t)[a],
        )

    def sample_taus(self, n):
        t0, t1 = self.interval
        return np.linspace(t0, t1, n)

    def check_regular(self, n=33):
        """The curve must have a nonzero velocity at every sample node."""
        for tau in self.sample_taus(n):
            _, v = self.eval(float(tau))
            if max(abs(c) for c in v) == 0.0:
                raise DomainError(
                    f"worldline has vanishing velocity at tau = {tau}"
                )
        return True

    def is_adapted(self, n=17, tol=1e-12):
        """True when C(tau) = (tau, 0, 0, 0) on sample nodes."""
        for tau in self.sample_taus(n):
            p, v = self.eval(float(tau))
            if abs(p[0] - tau) > tol * max(1.0, abs(tau)):
                return False
            if max(abs(p[i]) for i in (1, 2, 3)) > tol:
                return False
            if abs(v[0] - 1.0) > tol or max(abs(v[i]) for i in (1, 2, 3)) > tol:
                return False
        return True

    def push_through_chart(self, chart):
        """The image worldline, components composed by substitution."""
        mapping = {i: self.components[i] for i in range(4)}
        comps = tuple(c.subs(mapping) for c in chart.forward)
        return Worldline(comps, self.interval)

    def reparametrized(self, rep):
        """The same curve as a function of the new parameter."""
        mapping = {0: rep.map}
        comps = tuple(c.subs(mapping) for c in self.components)
        return Worldline(comps, rep.interval_hat)


@dataclass(frozen=True)
class Reparametrization:
    """Orientation-preserving parameter change tau(tau_hat)."""

    map: Expr  # tau as an expression in tau_hat (variable 0)
    interval_hat: tuple

    def __post_init__(self):
        t0, t1 = self.interval_hat
        if not t0 < t1:
            raise DomainError(f"empty parameter interval [{t0}, {t1}]")
        for th in np.linspace(t0, t1, 33):
            if self.speed(float(th)) <= 0.0:
                raise DomainError(
                    f"reparametrization is not orientation-preserving at "
                    f"tau_hat = {th}"
                )

    def tau_of(self, tau_hat):
        return self.map.eval_value((float(tau_hat), 0.0, 0.0, 0.0))

    def speed(self, tau_hat):
        """d tau / d tau_hat."""
        seeds = Jet2.seed_point((float(tau_hat), 0.0, 0.0, 0.0))
        return self.map.eval_jet(seeds).grad[0]

    def speed_deriv(self, tau_hat):
        seeds = Jet2.seed_point((float(tau_hat), 0.0, 0.0, 0.0))
        return self.map.eval_jet(seeds).hess[0]
