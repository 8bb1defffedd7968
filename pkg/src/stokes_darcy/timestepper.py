"""Decoupled second-order IMEX steps for the conduit/matrix system.

Both schemes share one template.  With ``w = (u, phi)``, history weights
``m`` (time difference), ``k`` (implicit operator) and ``e`` (explicit
extrapolation of the interface coupling)::

    <(m0 w1 + m1 w0 + m2 w_1)/dt, v> + (a + a_st)(k0 w1 + k1 w0 + k2 w_1, v)
        + b(v, k0 p1 + k1 p0 + k2 p_1)
        = <f(t0 + c dt), v> - (a_Gamma - a_st)(e1 w0 + e2 w_1, v)
    b(u1, q) = 0

BDF2 uses m = (3/2, -2, 1/2), k = (1, 0, 0), e = (2, -1), c = 1.
AMB2 uses m = (1, -1, 0), k = (alpha, 3/2 - 2 alpha, alpha - 1/2),
e = (3/2, -1/2), c = 1/2.  Since the interface coupling only involves old
levels, each step is one Stokes solve and one head solve.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import Discretization
from .linsolve import DirichletSolver, SingularMatrixError
from .params import PhysicalParams

log = logging.getLogger(__name__)

BDF2 = "bdf2"
AMB2 = "amb2"
BDF1 = "bdf1"


class StabilityError(RuntimeError):
    def __init__(self, step, message="non-finite values in solution"):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class SchemeCoefficients:
    mass: tuple  # (m0, m1, m2)
    implicit: tuple  # (k0, k1, k2)
    extrapolation: tuple  # (e1, e2)
    forcing_offset: float  # forcing evaluated at t_n + offset * dt


def scheme_coefficients(scheme: str, alpha: float = 0.8) -> SchemeCoefficients:
    scheme = scheme.lower()
    if scheme == BDF2:
        return SchemeCoefficients((1.5, -2.0, 0.5), (1.0, 0.0, 0.0), (2.0, -1.0), 1.0)
    if scheme == AMB2:
        if not 0.5 < alpha < 1.0:
            raise ValueError(f"AMB2 needs 1/2 < alpha < 1, got {alpha}")
        return SchemeCoefficients((1.0, -1.0, 0.0), d_alpha(alpha), (1.5, -0.5), 0.5)
    if scheme == BDF1:
        return SchemeCoefficients((1.0, -1.0, 0.0), (1.0, 0.0, 0.0), (1.0, 0.0), 1.0)
    raise ValueError(f"unknown scheme {scheme!r}")


def d_alpha(alpha: float) -> tuple:
    """Weights of alpha v^{n+1} + (3/2 - 2 alpha) v^n + (alpha - 1/2) v^{n-1}."""
    return (alpha, 1.5 - 2.0 * alpha, alpha - 0.5)


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = BDF2
    dt: float = 1.0 / 16
    alpha: float = 0.8
    params: PhysicalParams = field(default_factory=PhysicalParams)
    tri_degree: int = 5
    edge_degree: int = 5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        scheme_coefficients(self.scheme, self.alpha)

    @property
    def coefficients(self) -> SchemeCoefficients:
        return scheme_coefficients(self.scheme, self.alpha)


@dataclass
class TimeLevel:
    u: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    t: float

    @property
    def state(self):
        return np.concatenate([self.u, self.phi])


class StepOperators:
    """Factorized Stokes and head systems for one (discretization, scheme, dt)."""

    def __init__(self, disc: Discretization, coeffs: SchemeCoefficients, dt: float):
        self.disc = disc
        self.coeffs = coeffs
        self.dt = dt
        ops = disc.ops
        m0, k0 = coeffs.mass[0], coeffs.implicit[0]
        self.A_fluid = (ops.A_f + ops.A_bjsj + ops.N_f).tocsr()
        self.A_head = (ops.A_p + ops.N_p).tocsr()
        K_u = (m0 / dt) * ops.M_f + k0 * self.A_fluid
        saddle = sp.bmat([[K_u, ops.B.T], [ops.B, None]], format="csr")
        self.stokes = DirichletSolver(saddle, disc.spaces.velocity.dirichlet, symmetric=True)
        K_phi = (m0 / dt) * ops.M_p + k0 * self.A_head
        self.darcy = DirichletSolver(K_phi, disc.spaces.head.dirichlet, symmetric=True)
        self.C_pf = ops.C_pf

    @property
    def n_velocity(self):
        return self.disc.spaces.velocity.n_dofs


def build_step_operators(disc: Discretization, config: SchemeConfig) -> StepOperators:
    return StepOperators(disc, config.coefficients, config.dt)


class BoundaryData:
    """Nodal interpolation of a case's exact solution on Dirichlet nodes."""

    def __init__(self, disc: Discretization, case):
        self.case = case
        sp_ = disc.spaces
        self.vel_idx = sp_.velocity.dirichlet
        ns = sp_.velocity.n_scalar
        scalar = self.vel_idx[self.vel_idx < ns]
        self._vx = sp_.velocity.nodes[scalar]
        self._head_idx = sp_.head.dirichlet
        self._hx = sp_.head.nodes[self._head_idx]

    def velocity(self, t):
        u1, u2 = self.case.velocity(self._vx[:, 0], self._vx[:, 1], t)
        return np.concatenate([np.broadcast_to(u1, len(self._vx)),
                               np.broadcast_to(u2, len(self._vx))])

    def head(self, t):
        return np.broadcast_to(self.case.head(self._hx[:, 0], self._hx[:, 1], t),
                               len(self._hx)).astype(float)


def interpolate_level(disc: Discretization, case, t) -> TimeLevel:
    sp_ = disc.spaces
    return TimeLevel(
        u=sp_.velocity.interpolate(lambda x, y: case.velocity(x, y, t)),
        p=sp_.pressure.interpolate(lambda x, y: case.pressure(x, y, t)),
        phi=sp_.head.interpolate(lambda x, y: case.head(x, y, t)),
        t=float(t),
    )


def imex_step(ops: StepOperators, prev: TimeLevel, prev2: TimeLevel, loads, bc: BoundaryData,
              step_index=None) -> TimeLevel:
    """Advance from levels (prev2, prev) to the next level."""
    dt, c = ops.dt, ops.coeffs
    uses_prev2 = c.mass[2] or c.implicit[2] or c.extrapolation[1]
    if uses_prev2 and abs((prev.t - prev2.t) - dt) > 1e-12:
        raise ValueError(f"levels are {prev.t - prev2.t} apart, expected dt={dt}")
    d = ops.disc.ops
    m0, m1, m2 = c.mass
    k0, k1, k2 = c.implicit
    e1, e2 = c.extrapolation
    t_new = prev.t + dt
    F_f, F_p = loads(prev.t + c.forcing_offset * dt)

    u_ext = e1 * prev.u + e2 * prev2.u
    phi_ext = e1 * prev.phi + e2 * prev2.phi

    rhs_u = (F_f - d.M_f @ ((m1 / dt) * prev.u + (m2 / dt) * prev2.u)
             - d.C_fp @ phi_ext + d.N_f @ u_ext)
    if k1 or k2:
        rhs_u -= ops.A_fluid @ (k1 * prev.u + k2 * prev2.u)
    rhs_s = np.concatenate([rhs_u, np.zeros(d.B.shape[0])])

    rhs_phi = (F_p - d.M_p @ ((m1 / dt) * prev.phi + (m2 / dt) * prev2.phi)
               - ops.C_pf @ u_ext + d.N_p @ phi_ext)
    if k1 or k2:
        rhs_phi -= ops.A_head @ (k1 * prev.phi + k2 * prev2.phi)

    try:
        x = ops.stokes.solve(rhs_s, bc.velocity(t_new))
        phi = ops.darcy.solve(rhs_phi, bc.head(t_new))
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"step {step_index}: {exc}", exc.row) from None
    nu = ops.n_velocity
    u = x[:nu]
    q = x[nu:]
    p = (q - k1 * prev.p - k2 * prev2.p) / k0
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(phi)) and np.all(np.isfinite(p))):
        raise StabilityError(step_index)
    return TimeLevel(u, p, phi, t_new)


def bdf2_step(ops, prev, prev2, loads, bc, step_index=None):
    if ops.coeffs != scheme_coefficients(BDF2):
        raise ValueError("operators were not built for BDF2")
    return imex_step(ops, prev, prev2, loads, bc, step_index)


def amb2_step(ops, prev, prev2, loads, bc, step_index=None):
    if ops.coeffs.forcing_offset != 0.5:
        raise ValueError("operators were not built for AMB2")
    return imex_step(ops, prev, prev2, loads, bc, step_index)


def initialize(case, disc: Discretization, config: SchemeConfig, mode="exact"):
    """Two starting levels at t = 0 and t = dt.

    ``exact`` interpolates the closed-form solution at both times.
    ``zero`` keeps boundary values and zeroes every interior DOF.
    ``bdf1`` interpolates at t = 0 and takes one backward-Euler step.
    """
    dt = config.dt
    lvl0 = interpolate_level(disc, case, 0.0)
    if mode == "exact":
        return lvl0, interpolate_level(disc, case, dt)
    if mode == "zero":
        levels = []
        for t in (0.0, dt):
            lvl = interpolate_level(disc, case, t)
            keep_u = np.zeros_like(lvl.u)
            keep_u[disc.spaces.velocity.dirichlet] = lvl.u[disc.spaces.velocity.dirichlet]
            keep_phi = np.zeros_like(lvl.phi)
            keep_phi[disc.spaces.head.dirichlet] = lvl.phi[disc.spaces.head.dirichlet]
            levels.append(TimeLevel(keep_u, np.zeros_like(lvl.p), keep_phi, t))
        return levels[0], levels[1]
    if mode == "bdf1":
        ops = StepOperators(disc, scheme_coefficients(BDF1), dt)
        lvl1 = imex_step(ops, lvl0, lvl0, disc.load_assembler(case), BoundaryData(disc, case), 1)
        return lvl0, lvl1
    raise ValueError(f"unknown initialization {mode!r}")


# --- diagnostics --------------------------------------------------------------

def g_energy(v0, v1, mass) -> float:
    """|(v0, v1)|_G^2 = 1/2 |v0|^2 - 2 <v0, v1> + 5/2 |v1|^2 in the inner product ``mass``."""
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    if v0.shape != v1.shape or mass.shape[0] != v0.shape[0]:
        raise ValueError("state vectors and mass matrix have mismatched sizes")
    Mv0, Mv1 = mass @ v0, mass @ v1
    return float(0.5 * v0 @ Mv0 - 2.0 * v0 @ Mv1 + 2.5 * v1 @ Mv1)


def relative_l2(num, exact) -> float:
    den = np.linalg.norm(exact)
    err = np.linalg.norm(num - exact)
    return float(err / den) if den > 0 else float(err)


@dataclass
class MonitorRow:
    step: int
    t: float
    e_phi: float
    e_u: float
    e_p: float
    s_norm: float
    g_energy: float
    h1_u: float
    h1_phi: float
    div_residual: float

    FIELDS = ("step", "t", "e_phi", "e_u", "e_p", "s_norm", "g_energy", "h1_u", "h1_phi",
              "div_residual")

    def as_tuple(self):
        return tuple(getattr(self, f) for f in self.FIELDS)


class Monitor:
    """Errors against the exact solution and energy quantities for one level pair."""

    def __init__(self, disc: Discretization, case, reference=None):
        self.disc = disc
        self.case = case
        self.S = disc.ops.S_mass
        self.reference = reference  # optional TimeLevel replacing the exact solution

    def errors(self, lvl: TimeLevel):
        ref = self.reference or interpolate_level(self.disc, self.case, lvl.t)
        return (relative_l2(lvl.phi, ref.phi), relative_l2(lvl.u, ref.u),
                relative_l2(lvl.p, ref.p))

    def row(self, step, lvl: TimeLevel, prev: TimeLevel | None) -> MonitorRow:
        ops = self.disc.ops
        e_phi, e_u, e_p = self.errors(lvl)
        w = lvl.state
        s_norm = math.sqrt(max(float(w @ (self.S @ w)), 0.0))
        gE = g_energy(prev.state, w, self.S) if prev is not None else float("nan")
        return MonitorRow(
            step=step, t=lvl.t, e_phi=e_phi, e_u=e_u, e_p=e_p, s_norm=s_norm, g_energy=gE,
            h1_u=math.sqrt(max(float(lvl.u @ (ops.L_f @ lvl.u)), 0.0)),
            h1_phi=math.sqrt(max(float(lvl.phi @ (ops.L_p @ lvl.phi)), 0.0)),
            div_residual=float(np.max(np.abs(ops.B @ lvl.u))),
        )


@dataclass
class TransientResult:
    final: TimeLevel
    previous: TimeLevel
    series: list
    steps: int
    max_div_residual: float
    max_dalpha_div_residual: float


def run_transient(case, disc, config: SchemeConfig, T: float, sample_every: int = 1,
                  init: str = "exact", reference=None, callback=None) -> TransientResult:
    """March from t = 0 to T; monitor rows are taken every ``sample_every`` steps.

    The first row describes the level at t = dt (the second starting level).
    ``reference`` replaces the exact solution in the error monitors, e.g. a
    steady discrete solution.  Raises StabilityError on non-finite values.
    """
    if not isinstance(disc, Discretization):
        disc = Discretization.build(disc, config.params, config.tri_degree, config.edge_degree)
    nsteps_f = T / config.dt
    nsteps = int(round(nsteps_f))
    if nsteps < 1 or abs(nsteps_f - nsteps) > 1e-9 * max(1.0, nsteps_f):
        raise ValueError(f"T/dt = {nsteps_f} is not a positive integer")
    ops = build_step_operators(disc, config)
    loads = disc.load_assembler(case)
    bc = BoundaryData(disc, case)
    mon = Monitor(disc, case, reference)
    lvl0, lvl1 = initialize(case, disc, config, init)
    series = [mon.row(1, lvl1, lvl0)]
    k = ops.coeffs.implicit
    B = disc.ops.B
    max_div = 0.0
    max_dalpha = 0.0
    prev2, prev = lvl0, lvl1
    # level 1 is the second starting level; steps run from level 2 to level nsteps
    for step in range(2, nsteps + 1):
        new = imex_step(ops, prev, prev2, loads, bc, step_index=step)
        div = float(np.max(np.abs(B @ new.u)))
        max_div = max(max_div, div)
        dal = float(np.max(np.abs(B @ (k[0] * new.u + k[1] * prev.u + k[2] * prev2.u))))
        max_dalpha = max(max_dalpha, dal)
        prev2, prev = prev, new
        if (step - 1) % sample_every == 0 or step == nsteps:
            series.append(mon.row(step, new, prev2))
        if callback is not None:
            callback(step, new)
    return TransientResult(prev, prev2, series, nsteps, max_div, max_dalpha)


def solve_steady(disc: Discretization, case, t: float = 0.0) -> TimeLevel:
    """Monolithic steady coupled solve (no time derivative, implicit coupling).

    This is the discrete fixed point of both schemes for time-independent
    data, computed without any splitting.
    """
    ops = disc.ops
    sp_ = disc.spaces
    nu, npr = sp_.velocity.n_dofs, sp_.pressure.n_dofs
    K = sp.bmat([
        [ops.A_f + ops.A_bjsj, ops.B.T, ops.C_fp],
        [ops.B, None, None],
        [ops.C_pf, None, ops.A_p],
    ], format="csr")
    F_f, F_p = disc.load_assembler(case)(t)
    rhs = np.concatenate([F_f, np.zeros(npr), F_p])
    bc = BoundaryData(disc, case)
    fixed = np.concatenate([sp_.velocity.dirichlet, nu + npr + sp_.head.dirichlet])
    values = np.concatenate([bc.velocity(t), bc.head(t)])
    x = DirichletSolver(K, fixed).solve(rhs, values)
    return TimeLevel(x[:nu], x[nu:nu + npr], x[nu + npr:], float(t))
