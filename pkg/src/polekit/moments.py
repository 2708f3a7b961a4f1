"""Monopole, dipole and quadrupole component containers.

Dipole components gamma2[a][b] are antisymmetric; quadrupole components
gamma3[a][b][c] are symmetric in the last two slots and cyclic-free
(gamma[abc] + gamma[bca] + gamma[cab] = 0), leaving 20 independent
entries.  Components are functions of tau (:class:`TauFn`), so both
expression-declared sources and quadrature-backed transport results fit
the same containers.  Symmetry is validated at sampled tau values, never
assumed.

Index conventions: index 0 is the tau-like coordinate, spatial indices
run 1..3, and the Levi-Civita symbol has eps[1,2,3] = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SymmetryError
from .quadrature import CumulativeIntegral
from .taufn import TauFn, ZERO

_SPATIAL = (1, 2, 3)

_EPS = np.zeros((4, 4, 4))
for _i, _j, _k, _s in (
    (1, 2, 3, 1.0), (2, 3, 1, 1.0), (3, 1, 2, 1.0),
    (1, 3, 2, -1.0), (3, 2, 1, -1.0), (2, 1, 3, -1.0),
):
    _EPS[_i, _j, _k] = _s


def _wrap_grid2(grid):
    return tuple(
        tuple(TauFn.wrap(grid[a][b]) for b in range(4)) for a in range(4)
    )


def _wrap_grid3(grid):
    return tuple(
        tuple(
            tuple(TauFn.wrap(grid[a][b][c]) for c in range(4))
            for b in range(4)
        )
        for a in range(4)
    )


def _zero_grid2():
    return [[ZERO for _ in range(4)] for _ in range(4)]


def _zero_grid3():
    return [[[ZERO for _ in range(4)] for _ in range(4)] for _ in range(4)]


def sample_taus(interval, n=50, seed=0):
    """Deterministic random tau samples used by symmetry validation."""
    rng = np.random.default_rng(seed)
    t0, t1 = interval
    return np.sort(rng.uniform(t0, t1, n))


@dataclass(frozen=True)
class Monopole:
    """An invariant point charge carried along the worldline."""

    q: float


class DipoleComponents:
    """Antisymmetric 4x4 grid of tau-dependent dipole components."""

    def __init__(self, grid):
        self.gamma2 = _wrap_grid2(grid)

    @staticmethod
    def zero():
        return DipoleComponents(_zero_grid2())

    @staticmethod
    def from_dict(entries):
        grid = _zero_grid2()
        for (a, b), fn in entries.items():
            grid[a][b] = TauFn.wrap(fn)
        return DipoleComponents(grid)

    def __getitem__(self, ab):
        a, b = ab
        return self.gamma2[a][b]

    def nonzero(self):
        return [
            (a, b, self.gamma2[a][b])
            for a in range(4)
            for b in range(4)
            if not self.gamma2[a][b].is_zero
        ]

    def values_at(self, tau):
        out = np.zeros((4, 4))
        for a, b, fn in self.nonzero():
            out[a, b] = fn(tau)
        return out

    def scale(self, taus):
        return max(
            (abs(fn(t)) for _, _, fn in self.nonzero() for t in taus),
            default=0.0,
        )

    def check_antisymmetry(self, taus, tol=1e-12):
        """Largest |gamma[ab] + gamma[ba]|; raises above tol * scale."""
        worst = 0.0
        ref = max(1.0, self.scale(taus))
        for t in taus:
            g = self.values_at(t)
            r = np.max(np.abs(g + g.T))
            if r > worst:
                worst = r
            if r > tol * ref:
                idx = np.unravel_index(np.argmax(np.abs(g + g.T)), (4, 4))
                raise SymmetryError(
                    f"dipole components not antisymmetric at tau={t}: "
                    f"|gamma{idx} + gamma{idx[::-1]}| = {r:.3e}",
                    index=tuple(int(i) for i in idx),
                    tau=float(t),
                )
        return worst


class QuadrupoleComponents:
    """4x4x4 grid of tau-dependent quadrupole components.

    Full storage with validated constraints is deliberate: the transport
    law is index-natural, and packing into 20 parameters is a
    presentation concern.
    """

    def __init__(self, grid, meta=None):
        self.gamma3 = _wrap_grid3(grid)
        self.meta = dict(meta) if meta else {}
        self._nonzero = None

    @staticmethod
    def zero():
        return QuadrupoleComponents(_zero_grid3())

    @staticmethod
    def from_dict(entries, meta=None):
        grid = _zero_grid3()
        for (a, b, c), fn in entries.items():
            grid[a][b][c] = TauFn.wrap(fn)
        return QuadrupoleComponents(grid, meta)

    def __getitem__(self, abc):
        a, b, c = abc
        return self.gamma3[a][b][c]

    def nonzero(self):
        if self._nonzero is None:
            self._nonzero = [
                (a, b, c, self.gamma3[a][b][c])
                for a in range(4)
                for b in range(4)
                for c in range(4)
                if not self.gamma3[a][b][c].is_zero
            ]
        return self._nonzero

    def values_at(self, tau):
        out = np.zeros((4, 4, 4))
        for a, b, c, fn in self.nonzero():
            out[a, b, c] = fn(tau)
        return out

    def scale(self, taus):
        return max(
            (abs(fn(t)) for _, _, _, fn in self.nonzero() for t in taus),
            default=0.0,
        )

    def symmetry_residuals(self, taus):
        """(max |g[abc]-g[acb]|, max |g[abc]+g[bca]+g[cab]|) over taus."""
        worst_pair = 0.0
        worst_cyc = 0.0
        for t in taus:
            g = self.values_at(t)
            worst_pair = max(
                worst_pair, float(np.max(np.abs(g - g.transpose(0, 2, 1))))
            )
            cyc = g + g.transpose(1, 2, 0) + g.transpose(2, 0, 1)
            worst_cyc = max(worst_cyc, float(np.max(np.abs(cyc))))
        return worst_pair, worst_cyc

    def check_symmetries(self, taus, tol=1e-12):
        ref = max(1.0, self.scale(taus))
        for t in taus:
            g = self.values_at(t)
            pair = np.abs(g - g.transpose(0, 2, 1))
            if np.max(pair) > tol * ref:
                idx = np.unravel_index(np.argmax(pair), (4, 4, 4))
                raise SymmetryError(
                    f"gamma{tuple(idx)} != gamma with last slots swapped "
                    f"at tau={t} (residual {np.max(pair):.3e})",
                    index=tuple(int(i) for i in idx),
                    tau=float(t),
                )
            cyc = np.abs(g + g.transpose(1, 2, 0) + g.transpose(2, 0, 1))
            if np.max(cyc) > tol * ref:
                idx = np.unravel_index(np.argmax(cyc), (4, 4, 4))
                raise SymmetryError(
                    f"cyclic sum over gamma{tuple(idx)} is nonzero at "
                    f"tau={t} (residual {np.max(cyc):.3e})",
                    index=tuple(int(i) for i in idx),
                    tau=float(t),
                )
        return True


# -- symmetry constraint algebra ------------------------------------------


def _constraint_matrix():
    rows = []
    for a in range(4):
        for b in range(4):
            for c in range(b + 1, 4):
                row = np.zeros(64)
                row[16 * a + 4 * b + c] += 1.0
                row[16 * a + 4 * c + b] -= 1.0
                rows.append(row)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                row = np.zeros(64)
                row[16 * a + 4 * b + c] += 1.0
                row[16 * b + 4 * c + a] += 1.0
                row[16 * c + 4 * a + b] += 1.0
                rows.append(row)
    return np.array(rows)


_BASIS_CACHE = {}


def quadrupole_basis():
    """Orthonormal basis (as (4,4,4) arrays) of the valid-component space."""
    if "basis" not in _BASIS_CACHE:
        C = _constraint_matrix()
        _, s, vt = np.linalg.svd(C)
        tol = max(C.shape) * np.finfo(float).eps * s[0]
        null = vt[np.sum(s > tol):]
        _BASIS_CACHE["basis"] = [v.reshape(4, 4, 4) for v in null]
    return _BASIS_CACHE["basis"]


def symmetry_projector():
    """Orthogonal projector onto the valid-component subspace (64x64)."""
    if "proj" not in _BASIS_CACHE:
        B = np.array([b.reshape(64) for b in quadrupole_basis()])
        _BASIS_CACHE["proj"] = B.T @ B
    return _BASIS_CACHE["proj"]


def component_rank(kind, velocity=(1.0, 0.31, -0.22, 0.17)):
    """Numerical rank of the parameters-to-components map.

    For the gauge-quotiented electric kinds the kernel of the map is
    exactly the gauge family, so the plain rank is already the quotient
    dimension.
    """
    v = np.asarray(velocity, dtype=float)
    if kind == "dipole":
        cols = []
        for a in range(4):
            for b in range(a + 1, 4):
                m = np.zeros((4, 4))
                m[a, b] = 1.0
                m[b, a] = -1.0
                cols.append(m.reshape(16))
        return int(np.linalg.matrix_rank(np.array(cols).T))
    if kind == "quadrupole":
        B = np.array([b.reshape(64) for b in quadrupole_basis()])
        return int(np.linalg.matrix_rank(B.T))
    if kind == "electric_dipole_mod_gauge":
        cols = []
        for a in range(4):
            w = np.zeros(4)
            w[a] = 1.0
            g = np.outer(w, v) - np.outer(v, w)
            cols.append(g.reshape(16))
        return int(np.linalg.matrix_rank(np.array(cols).T))
    if kind == "electric_quadrupole_mod_gauge":
        cols = []
        for b in range(4):
            for c in range(4):
                q = np.zeros((4, 4))
                q[b, c] = 1.0
                g = (
                    np.einsum("a,bc->abc", v, q)
                    + np.einsum("a,cb->abc", v, q)
                    - np.einsum("b,ac->abc", v, q)
                    - np.einsum("c,ab->abc", v, q)
                )
                cols.append(g.reshape(64))
        return int(np.linalg.matrix_rank(np.array(cols).T))
    raise DomainError(f"unknown component kind {kind!r}")


# -- constructors -----------------------------------------------------------


def make_static_dipole(p_ed, p_md):
    """Constant dipole from electric and magnetic 3-vectors."""
    p_ed = np.asarray(p_ed, dtype=float)
    p_md = np.asarray(p_md, dtype=float)
    g = np.zeros((4, 4))
    for mu in _SPATIAL:
        g[0, mu] = p_ed[mu - 1]
        g[mu, 0] = -p_ed[mu - 1]
    for mu in _SPATIAL:
        for nu in _SPATIAL:
            g[mu, nu] = sum(
                _EPS[mu, nu, s] * p_md[s - 1] for s in _SPATIAL
            )
    return DipoleComponents(
        [[TauFn.constant(g[a, b]) for b in range(4)] for a in range(4)]
    )


def static_dipole_vectors(dip, tau=0.0):
    """Inverse of :func:`make_static_dipole` at one tau."""
    g = dip.values_at(tau)
    p_ed = np.array([g[0, mu] for mu in _SPATIAL])
    p_md = np.array(
        [
            0.5
            * sum(
                _EPS[mu, nu, s] * g[mu, nu]
                for mu in _SPATIAL
                for nu in _SPATIAL
            )
            for s in _SPATIAL
        ]
    )
    return p_ed, p_md


def make_toroidal_quadrupole(T):
    """Spatial quadrupole pattern built from a 3-vector.

    The delta-pattern recipe is symmetrized onto the valid-component
    subspace by orthogonal projection; ``meta['projection_residual']``
    records how much of the raw pattern the projection removed.
    """
    T = np.asarray(T, dtype=float)
    raw = np.zeros((4, 4, 4))
    for mu in _SPATIAL:
        for nu in _SPATIAL:
            for sg in _SPATIAL:
                val = 0.0
                if mu == sg:
                    val += T[nu - 1]
                if mu == nu:
                    val += T[sg - 1]
                if nu == sg:
                    val -= 2.0 * T[sg - 1]
                raw[mu, nu, sg] = val
    flat = raw.reshape(64)
    proj = symmetry_projector() @ flat
    resid = float(np.linalg.norm(flat - proj))
    g = proj.reshape(4, 4, 4)
    grid = [
        [[TauFn.constant(g[a, b, c]) for c in range(4)] for b in range(4)]
        for a in range(4)
    ]
    return QuadrupoleComponents(grid, meta={"projection_residual": resid})


def make_electric_dipole(w, worldline):
    """gamma[ab] = w^a v^b - w^b v^a with v the worldline velocity."""
    wf = [TauFn.wrap(c) for c in w]
    vf = [worldline.velocity_taufn(a) for a in range(4)]
    grid = _zero_grid2()
    for a in range(4):
        for b in range(4):
            if a != b:
                grid[a][b] = wf[a] * vf[b] - wf[b] * vf[a]
    return DipoleComponents(grid)


def make_electric_quadrupole(qgrid, worldline, validate=True):
    """gamma[abc] = v^a q^{bc} + v^a q^{cb} - v^b q^{ac} - v^c q^{ab}."""
    qf = [[TauFn.wrap(qgrid[b][c]) for c in range(4)] for b in range(4)]
    vf = [worldline.velocity_taufn(a) for a in range(4)]
    grid = _zero_grid3()
    for a in range(4):
        for b in range(4):
            for c in range(4):
                grid[a][b][c] = (
                    vf[a] * qf[b][c]
                    + vf[a] * qf[c][b]
                    - vf[b] * qf[a][c]
                    - vf[c] * qf[a][b]
                )
    out = QuadrupoleComponents(grid)
    if validate:
        out.check_symmetries(sample_taus(worldline.interval), tol=1e-10)
    return out


def _antisym_grid(p):
    if isinstance(p, DipoleComponents):
        return [[p.gamma2[a][b] for b in range(4)] for a in range(4)]
    return [[TauFn.wrap(p[a][b]) for b in range(4)] for a in range(4)]


def embed_dipole_as_quadrupole(p, worldline, validate=True):
    """gamma[abc] = p^{ab} v^c + p^{ac} v^b for antisymmetric p."""
    pf = _antisym_grid(p)
    taus = sample_taus(worldline.interval, n=11)
    for a in range(4):
        for b in range(a, 4):
            for t in taus:
                if abs(pf[a][b](t) + pf[b][a](t)) > 1e-10:
                    raise SymmetryError(
                        f"p[{a}][{b}] is not antisymmetric at tau={t}",
                        index=(a, b),
                        tau=float(t),
                    )
    vf = [worldline.velocity_taufn(a) for a in range(4)]
    grid = _zero_grid3()
    for a in range(4):
        for b in range(4):
            for c in range(4):
                grid[a][b][c] = pf[a][b] * vf[c] + pf[a][c] * vf[b]
    out = QuadrupoleComponents(grid)
    if validate:
        out.check_symmetries(sample_taus(worldline.interval), tol=1e-10)
    return out


def extract_dipole(p):
    """The dipole gamma[ab] = d p^{ab} / d tau hiding in an embedded
    antisymmetric p."""
    pf = _antisym_grid(p)
    grid = _zero_grid2()
    for a in range(4):
        for b in range(4):
            fn = pf[a][b]
            if not fn.is_zero:
                grid[a][b] = fn.derivative_fn()
    return DipoleComponents(grid)


# -- adapted-coordinate coefficient dictionary ------------------------------

_SPAIRS = ((1, 2), (1, 3), (2, 3))


@dataclass
class AdaptedCoefficients:
    """Coefficients of a degree-three distribution over an adapted
    worldline in the basis of spatial probe derivatives.

    ``charge``      -> coefficient of phi_0
    ``zeroth[nu]``  -> coefficient of phi_nu            (nu = 1..3)
    ``first_0[mu]`` -> coefficient of d_mu phi_0
    ``first[mu][nu]``   -> coefficient of d_mu phi_nu
    ``second_0[mu][nu]``    -> coefficient of d_mu d_nu phi_0   (sym)
    ``second[mu][nu][rho]`` -> coefficient of d_mu d_nu phi_rho (sym in
    mu, nu).  Spatial indices are stored 1..3 in 4-sized grids; slot 0
    is unused.  The symmetric families are canonically stored at the
    sorted index pair; use :meth:`second0_at` / :meth:`second_at`.
    """

    charge: TauFn
    zeroth: list
    first_0: list
    first: list
    second_0: list
    second: list
    interval: tuple

    @staticmethod
    def zero(interval):
        z4 = [ZERO] * 4
        return AdaptedCoefficients(
            charge=ZERO,
            zeroth=list(z4),
            first_0=list(z4),
            first=[list(z4) for _ in range(4)],
            second_0=[list(z4) for _ in range(4)],
            second=[[list(z4) for _ in range(4)] for _ in range(4)],
            interval=interval,
        )

    def second0_at(self, mu, nu):
        return self.second_0[min(mu, nu)][max(mu, nu)]

    def second_at(self, mu, nu, rho):
        return self.second[min(mu, nu)][max(mu, nu)][rho]

    def closedness_residuals(self, n=33):
        """Max residual of each conservation condition over sampled tau."""
        t0, t1 = self.interval
        taus = np.linspace(t0, t1, n)
        res = {
            "charge_constant": 0.0,
            "velocity_pair": 0.0,
            "diag_step": 0.0,
            "offdiag_step": 0.0,
            "diag_spatial": 0.0,
            "mixed_spatial": 0.0,
            "triple": 0.0,
        }
        for t in taus:
            res["charge_constant"] = max(
                res["charge_constant"], abs(self.charge.deriv(t))
            )
            for mu in _SPATIAL:
                res["velocity_pair"] = max(
                    res["velocity_pair"],
                    abs(self.first_0[mu].deriv(t) - self.zeroth[mu](t)),
                )
                res["diag_step"] = max(
                    res["diag_step"],
                    abs(
                        self.first[mu][mu](t)
                        - self.second0_at(mu, mu).deriv(t)
                    ),
                )
                res["diag_spatial"] = max(
                    res["diag_spatial"], abs(self.second_at(mu, mu, mu)(t))
                )
                for rho in _SPATIAL:
                    if rho != mu:
                        res["mixed_spatial"] = max(
                            res["mixed_spatial"],
                            abs(
                                self.second_at(mu, mu, rho)(t)
                                + self.second_at(mu, rho, mu)(t)
                            ),
                        )
            for mu, nu in _SPAIRS:
                res["offdiag_step"] = max(
                    res["offdiag_step"],
                    abs(
                        self.first[mu][nu](t)
                        + self.first[nu][mu](t)
                        - self.second0_at(mu, nu).deriv(t)
                    ),
                )
            res["triple"] = max(
                res["triple"],
                abs(
                    self.second_at(1, 2, 3)(t)
                    + self.second_at(1, 3, 2)(t)
                    + self.second_at(2, 3, 1)(t)
                ),
            )
        return res

    def is_closed(self, tol=1e-9, n=33):
        res = self.closedness_residuals(n)
        scale = max(1.0, self._scale(n))
        return all(v <= tol * scale for v in res.values()), res

    def _scale(self, n=17):
        t0, t1 = self.interval
        taus = np.linspace(t0, t1, n)
        fns = [self.charge]
        fns += [self.zeroth[mu] for mu in _SPATIAL]
        fns += [self.first_0[mu] for mu in _SPATIAL]
        fns += [self.first[mu][nu] for mu in _SPATIAL for nu in _SPATIAL]
        fns += [
            self.second0_at(mu, nu)
            for mu in _SPATIAL
            for nu in _SPATIAL
            if mu <= nu
        ]
        fns += [
            self.second_at(mu, nu, rho)
            for mu in _SPATIAL
            for nu in _SPATIAL
            for rho in _SPATIAL
            if mu <= nu
        ]
        return max(
            (abs(f(t)) for f in fns for t in taus if not f.is_zero),
            default=0.0,
        )


def _deriv_taufn(fn, scale=1.0):
    return TauFn(
        lambda t: scale * fn.deriv(t),
        (lambda t: scale * fn.deriv2(t)) if fn.d2fn is not None else None,
    )


def zeta_from_gamma(monopole, quad, worldline):
    """Adapted-basis coefficients of a monopole + quadrupole bundle.

    The worldline must be in adapted form C(tau) = (tau, 0, 0, 0); the
    time-slot components then enter through their tau derivatives.
    """
    if not worldline.is_adapted():
        raise DomainError(
            "coefficient extraction needs an adapted worldline "
            "C(tau) = (tau, 0, 0, 0)"
        )
    g = quad.gamma3
    z = AdaptedCoefficients.zero(worldline.interval)
    z.charge = TauFn.constant(monopole.q)
    for mu in _SPATIAL:
        z.first_0[mu] = _deriv_taufn(g[mu][0][0], 0.5)
        z.zeroth[mu] = TauFn(lambda t, _f=g[mu][0][0]: 0.5 * _f.deriv2(t))
        for nu in _SPATIAL:
            z.first[mu][nu] = _deriv_taufn(g[nu][mu][0], -1.0)
    for mu in _SPATIAL:
        for nu in _SPATIAL:
            if mu > nu:
                continue
            if mu == nu:
                z.second_0[mu][mu] = g[0][mu][mu].scaled(0.5)
            else:
                z.second_0[mu][nu] = g[0][mu][nu]
            for rho in _SPATIAL:
                if mu == nu:
                    z.second[mu][mu][rho] = g[rho][mu][mu].scaled(0.5)
                else:
                    z.second[mu][nu][rho] = g[rho][mu][nu]
    return z


def gamma_from_zeta(z, constants=None, tol=1e-10):
    """Rebuild (monopole, quadrupole components) from adapted-basis
    coefficients.

    Entries whose dictionary relation involves a tau derivative are
    returned as running integrals anchored at the interval start;
    ``constants`` may supply their values at the anchor:
    ``{"v00": 3 reals for gamma[mu][0][0](tau0),
       "spatial_time": 3 reals for the antisymmetric part of
       gamma[mu][nu][0](tau0) over pairs (1,2), (1,3), (2,3)}``.
    """
    t0, t1 = z.interval
    constants = constants or {}
    c_v00 = np.asarray(constants.get("v00", (0.0, 0.0, 0.0)), dtype=float)
    c_st = np.asarray(
        constants.get("spatial_time", (0.0, 0.0, 0.0)), dtype=float
    )

    cum_v00 = CumulativeIntegral(
        lambda t: np.array([2.0 * z.first_0[mu](t) for mu in _SPATIAL]),
        t0, t1, 3, tol_abs=tol * 1e-2, tol_rel=tol * 1e-2,
        label="gamma[mu][0][0] reconstruction",
    )
    # d/dtau of the antisymmetric part of gamma[nu][mu][0], sorted pairs.
    cum_anti = CumulativeIntegral(
        lambda t: np.array(
            [
                0.5 * (z.first[nu][mu](t) - z.first[mu][nu](t))
                for nu, mu in _SPAIRS
            ]
        ),
        t0, t1, 3, tol_abs=tol * 1e-2, tol_rel=tol * 1e-2,
        label="spatial-time antisymmetric reconstruction",
    )

    def v00_fn(mu):
        k = mu - 1
        return TauFn(
            lambda t: c_v00[k] + float(cum_v00.value(t)[k]),
            lambda t: 2.0 * z.first_0[mu](t),
            (lambda t: 2.0 * z.first_0[mu].deriv(t))
            if z.first_0[mu].dfn is not None
            else None,
        )

    def anti_fn(nu, mu, sign):
        k = _SPAIRS.index((min(nu, mu), max(nu, mu)))
        if (nu, mu) != _SPAIRS[k]:
            sign = -sign

        def dval(t, _k=k):
            nu0, mu0 = _SPAIRS[_k]
            return 0.5 * (z.first[nu0][mu0](t) - z.first[mu0][nu0](t))

        return TauFn(
            lambda t, _k=k, _s=sign: _s * (c_st[_k] + float(cum_anti.value(t)[_k])),
            lambda t, _s=sign: _s * dval(t),
        )

    grid = _zero_grid3()
    for mu in _SPATIAL:
        grid[mu][0][0] = v00_fn(mu)
        half = grid[mu][0][0].scaled(-0.5)
        grid[0][mu][0] = half
        grid[0][0][mu] = half
    for mu in _SPATIAL:
        for nu in _SPATIAL:
            if mu == nu:
                grid[0][mu][mu] = z.second0_at(mu, mu).scaled(2.0)
            else:
                grid[0][mu][nu] = z.second0_at(mu, nu)
    for nu in _SPATIAL:
        for mu in _SPATIAL:
            if mu == nu:
                entry = z.second0_at(mu, mu).scaled(-1.0)
            else:
                sym = z.second0_at(mu, nu).scaled(-0.5)
                entry = sym + anti_fn(nu, mu, 1.0)
            grid[nu][mu][0] = entry
            grid[nu][0][mu] = entry
    for rho in _SPATIAL:
        for mu in _SPATIAL:
            for nu in _SPATIAL:
                if mu == nu:
                    grid[rho][mu][mu] = z.second_at(mu, mu, rho).scaled(2.0)
                else:
                    grid[rho][mu][nu] = z.second_at(mu, nu, rho)
    return Monopole(z.charge(t0)), QuadrupoleComponents(grid)
