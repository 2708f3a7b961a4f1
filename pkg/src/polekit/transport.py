"""Transport of multipole components between coordinate charts.

Dipole components move tensorially: two Jacobian factors and the
parameter-change factor.  Quadrupole components pick up an extra,
non-tensorial piece coupling the chart Hessian to the components through
a running integral

    P[d][e](tau) = kappa0[d][e]
        + integral_tau0^tau gamma[abc] (A^d_c A^e_ab - A^e_c A^d_ab),

which enters as hatted_gamma[def] = (dtau/dtau_hat) * (
    A^d_a A^e_b A^f_c gamma[abc]
    + P[d][e] vhat^f + P[d][f] vhat^e),

with vhat the hatted-coordinate velocity of the worldline (d/dtau of
the image curve).  The integration constant kappa0 shifts component
arrays but never any pairing; the lower limit is anchored at the
interval start so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .moments import DipoleComponents, QuadrupoleComponents
from .quadrature import CumulativeIntegral
from .taufn import TauFn

_DET_CUTOFF = 1e-12
_PPAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _antisym_from_vec(vec):
    M = np.zeros((4, 4))
    for k, (d, e) in enumerate(_PPAIRS):
        M[d, e] = vec[k]
        M[e, d] = -vec[k]
    return M


def _check_antisym(M, what):
    M = np.asarray(M, dtype=float)
    if M.shape != (4, 4):
        raise DomainError(f"{what} must be a 4x4 array")
    if np.max(np.abs(M + M.T)) > 1e-12:
        raise DomainError(f"{what} must be antisymmetric")
    return M


class PTerm:
    """The antisymmetric integral term of a quadrupole transport."""

    def __init__(self, cumulative, kappa0):
        self._cum = cumulative
        self.kappa0 = kappa0
        self.quadrature_error = cumulative.error
        self.nodes = cumulative.nodes

    def matrix_at(self, tau):
        return self.kappa0 + _antisym_from_vec(self._cum.value(tau))

    def deriv_matrix_at(self, tau):
        """The integrand; exact derivative of the running integral."""
        return _antisym_from_vec(self._cum.derivative(tau))

    def entry(self, d, e):
        return TauFn(
            lambda t: float(self.matrix_at(t)[d, e]),
            lambda t: float(self.deriv_matrix_at(t)[d, e]),
        )


@dataclass
class TransportResult:
    gamma3_hat: QuadrupoleComponents
    gamma2_hat: DipoleComponents | None
    P: PTerm
    integration_constant: np.ndarray
    worldline_hat: object
    interval_hat: tuple
    chart_label: str
    rep: object = None


def _source_frames(chart, worldline, gamma_values):
    """Per-tau chart data along the worldline, memoized.

    Quadrature nodes recur across the cumulative build and later
    pairings, so caching pays for itself.
    """

    @lru_cache(maxsize=4096)
    def frame(tau):
        point, vel = worldline.eval(tau)
        jl = chart.jets_at(point)
        A = np.array([j.grad for j in jl])
        if abs(np.linalg.det(A)) < _DET_CUTOFF:
            raise DomainError(
                f"chart {chart.label!r} is singular along the worldline "
                f"at tau = {tau}"
            )
        H = np.array([j.hessian_rows() for j in jl])
        g = gamma_values(tau)
        return point, np.asarray(vel), A, H, g

    return frame


def _rep_factors(rep):
    if rep is None:
        return (
            lambda th: th,
            lambda th: 1.0,
            lambda th: 0.0,
        )
    return rep.tau_of, rep.speed, rep.speed_deriv


def transform_dipole(gamma2, chart, worldline, rep=None):
    """Tensorial transport: hatted[cd] = (dtau/dtau_hat) A^c_a A^d_b g[ab]."""
    worldline.check_regular()
    frame = _source_frames(chart, worldline, gamma2.values_at)
    tau_of, speed, speed_deriv = _rep_factors(rep)

    @lru_cache(maxsize=4096)
    def F(tau):
        _, _, A, _, g = frame(tau)
        return A @ g @ A.T

    @lru_cache(maxsize=4096)
    def dF(tau):
        _, vel, A, H, g = frame(tau)
        dA = np.einsum("dab,b->da", H, vel)
        dg = np.zeros((4, 4))
        for a, b, fn in gamma2.nonzero():
            dg[a, b] = fn.deriv(tau)
        return dA @ g @ A.T + A @ dg @ A.T + A @ g @ dA.T

    def entry(c, d):
        def val(th):
            return speed(th) * float(F(tau_of(th))[c, d])

        def dval(th):
            w = speed(th)
            tau = tau_of(th)
            return speed_deriv(th) * float(F(tau)[c, d]) + w * w * float(
                dF(tau)[c, d]
            )

        return TauFn(val, dval)

    return DipoleComponents(
        [[entry(c, d) for d in range(4)] for c in range(4)]
    )


def transform_quadrupole(gamma3, chart, worldline, rep=None, kappa0=None,
                         tol_abs=1e-10, tol_rel=1e-10, split_dipole=False):
    """Full quadrupole transport, integral term included.

    Returns a :class:`TransportResult`; ``split_dipole`` additionally
    populates the emergent-dipole field with :func:`dipole_part` of the
    result.  Raises :class:`polekit.errors.QuadratureError` when the
    integral term cannot reach tolerance.
    """
    worldline.check_regular()
    if kappa0 is None:
        kappa0 = np.zeros((4, 4))
    kappa0 = _check_antisym(kappa0, "kappa0")
    frame = _source_frames(chart, worldline, gamma3.values_at)
    tau_of, speed, speed_deriv = _rep_factors(rep)
    t0, t1 = worldline.interval

    def integrand_vec(tau):
        _, _, A, H, g = frame(tau)
        # gamma[abc] (A^d_c A^e_ab - A^e_c A^d_ab) for pairs d < e.
        term = np.einsum("abc,dc,eab->de", g, A, H)
        M = term - term.T
        return np.array([M[d, e] for d, e in _PPAIRS])

    cumulative = CumulativeIntegral(
        integrand_vec, t0, t1, len(_PPAIRS),
        tol_abs=tol_abs, tol_rel=tol_rel,
        label=f"integral term through {chart.label!r}",
    )
    P = PTerm(cumulative, kappa0)

    @lru_cache(maxsize=4096)
    def F(tau):
        _, vel, A, _, g = frame(tau)
        tens = np.einsum("da,eb,fc,abc->def", A, A, A, g)
        Pm = P.matrix_at(tau)
        vhat = A @ vel
        return (
            tens
            + np.einsum("de,f->def", Pm, vhat)
            + np.einsum("df,e->def", Pm, vhat)
        )

    @lru_cache(maxsize=4096)
    def dF(tau):
        _, vel, A, H, g = frame(tau)
        acc = np.asarray(worldline.acceleration_at(tau))
        dA = np.einsum("dab,b->da", H, vel)
        dg = np.zeros((4, 4, 4))
        for a, b, c, fn in gamma3.nonzero():
            dg[a, b, c] = fn.deriv(tau)
        dtens = (
            np.einsum("da,eb,fc,abc->def", dA, A, A, g)
            + np.einsum("da,eb,fc,abc->def", A, dA, A, g)
            + np.einsum("da,eb,fc,abc->def", A, A, dA, g)
            + np.einsum("da,eb,fc,abc->def", A, A, A, dg)
        )
        Pm = P.matrix_at(tau)
        dPm = P.deriv_matrix_at(tau)
        vhat = A @ vel
        dvhat = dA @ vel + A @ acc
        return (
            dtens
            + np.einsum("de,f->def", dPm, vhat)
            + np.einsum("de,f->def", Pm, dvhat)
            + np.einsum("df,e->def", dPm, vhat)
            + np.einsum("df,e->def", Pm, dvhat)
        )

    def entry(d, e, f):
        def val(th):
            return speed(th) * float(F(tau_of(th))[d, e, f])

        def dval(th):
            w = speed(th)
            tau = tau_of(th)
            return speed_deriv(th) * float(F(tau)[d, e, f]) + w * w * float(
                dF(tau)[d, e, f]
            )

        return TauFn(val, dval)

    gamma3_hat = QuadrupoleComponents(
        [
            [[entry(d, e, f) for f in range(4)] for e in range(4)]
            for d in range(4)
        ]
    )
    worldline_hat = worldline.push_through_chart(chart)
    interval_hat = rep.interval_hat if rep is not None else worldline.interval
    if rep is not None:
        worldline_hat = worldline_hat.reparametrized(rep)
    result = TransportResult(
        gamma3_hat=gamma3_hat,
        gamma2_hat=None,
        P=P,
        integration_constant=kappa0,
        worldline_hat=worldline_hat,
        interval_hat=interval_hat,
        chart_label=chart.label,
        rep=rep,
    )
    if split_dipole:
        result.gamma2_hat = dipole_part(result)
    return result


def dipole_part(result):
    """The dipole hidden in a transport result: the derivative of its
    integral term, reparametrized like the components themselves.

    Constant shifts of P (the kappa0 freedom) drop out here.
    """
    tau_of, speed, _ = _rep_factors(result.rep)
    P = result.P

    def entry(d, e):
        def val(th):
            return speed(th) * float(P.deriv_matrix_at(tau_of(th))[d, e])

        return TauFn(val)

    return DipoleComponents(
        [[entry(d, e) for e in range(4)] for d in range(4)]
    )
