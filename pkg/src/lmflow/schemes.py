"""Time steppers for the gradient flow and the fixed-step run loop.

Three schemes share one state layout:

``original-lm``
    second-order Crank-Nicolson type Lagrange multiplier scheme; every step
    solves the scalar multiplier equation and fails if it has no root in the
    admissible bracket.
``modified-lm``
    same scheme, but the multiplier equation is only solved when the
    bulk-energy rate of the ``eta = 1`` candidate exceeds ``gamma``; otherwise
    the candidate is accepted as is.
``sav-cn``
    second-order scalar auxiliary variable scheme used as a reference.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .multiplier import (
    EtaSolveReport,
    DegenerateEquation,
    MultiplierError,
    assemble_g,
    compute_p,
    compute_q,
    energy_scale,
    gate_metric,
    sn_proxy,
    solve_eta,
)
from .potential import FlowSpec, bulk_energy, modified_energy, potential_Fprime, total_energy
from .spectral import Grid, check_field, make_grid, spectral_inner_product

log = logging.getLogger(__name__)

SCHEMES = ("original-lm", "modified-lm", "sav-cn")
BRANCHES = ("root-solved", "gated-eta-one", "sav")


class NonFiniteField(RuntimeError):
    """A step produced NaN or Inf values."""

    def __init__(self, message):
        super().__init__(message)
        self.step = None
        self.t = None

    def __str__(self):
        msg = super().__str__()
        if self.step is not None:
            msg = f"step {self.step} (t={self.t:.17g}): {msg}"
        return msg


@dataclass(frozen=True)
class RunConfig:
    flow: FlowSpec = field(default_factory=FlowSpec)
    nx: int = 128
    ny: int = 128
    lx: float = 2 * math.pi
    ly: float = 2 * math.pi
    dt: float = 1e-3
    t_final: float = 0.05
    gamma: float | None = None  # None means gamma = dt
    scheme: str = "modified-lm"
    seed: int = 0
    eta_tol: float = 1e-12
    snapshot_every: int = 0
    sav_c0: float = 0.0
    bracket_widen: float = 1.0
    # initial condition, used by lmflow.lab.initial_field
    init: str = "random"
    mean: float = 0.3
    amp: float = 0.01

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_final >= self.dt * (1 - 1e-12):
            raise ValueError(f"t_final ({self.t_final!r}) must be at least dt ({self.dt!r})")
        if self.gamma is not None and not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma!r}")
        if not self.eta_tol > 0:
            raise ValueError("eta_tol must be positive")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be nonnegative")
        if not self.bracket_widen > 0:
            raise ValueError("bracket_widen must be positive")
        self.n_steps  # validates divisibility

    @property
    def gate_tol(self):
        return self.dt if self.gamma is None else self.gamma

    @cached_property
    def grid(self) -> Grid:
        return make_grid(self.nx, self.ny, self.lx, self.ly)

    @property
    def n_steps(self) -> int:
        n = round(self.t_final / self.dt)
        if abs(n * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ValueError(f"t_final={self.t_final!r} is not a whole number of steps of dt={self.dt!r}")
        return n

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class SchemeState:
    phi_n: np.ndarray
    phi_nm1: np.ndarray
    t: float = 0.0
    step: int = 0
    sav_r: float | None = None
    sav_c0: float = 0.0


@dataclass(frozen=True)
class StepOutcome:
    phi_next: np.ndarray
    eta: float
    branch: str
    gate_value: float
    solver: EtaSolveReport | None
    energy: float
    modified_energy: float
    mass: float
    sn_proxy: float
    fallback: bool = False
    sav_r: float | None = None


@dataclass(frozen=True)
class TimeSeriesRecord:
    step: int
    t: float
    energy: float
    modified_energy: float
    eta: float
    branch: str
    gate_value: float
    sn_proxy: float
    newton_iters: int
    g_residual: float
    mass: float
    fallback: bool = False

    @classmethod
    def from_outcome(cls, step, t, out: StepOutcome):
        rep = out.solver
        return cls(
            step=step,
            t=t,
            energy=out.energy,
            modified_energy=out.modified_energy,
            eta=out.eta,
            branch=out.branch,
            gate_value=out.gate_value,
            sn_proxy=out.sn_proxy,
            newton_iters=rep.iterations if rep is not None else 0,
            g_residual=rep.residual if rep is not None else math.nan,
            mass=out.mass,
            fallback=out.fallback,
        )


def bootstrap(phi0, cfg: RunConfig | None = None) -> SchemeState:
    """Start a run with ``phi^{-1} = phi^0``.

    For the SAV scheme the auxiliary variable starts at
    ``sqrt((F(phi0), 1) + C0)``. A zero shift on a field sitting exactly in a
    well everywhere is bumped to ``C0 = 1``.
    """
    phi0 = np.array(phi0, dtype=np.float64)
    if not np.isfinite(phi0).all():
        raise ValueError("initial field has non-finite values")
    if cfg is not None:
        check_field(cfg.grid, phi0)
    if cfg is None or cfg.scheme != "sav-cn":
        return SchemeState(phi0, phi0.copy())
    c0 = cfg.sav_c0
    e1 = bulk_energy(cfg.grid, phi0)
    if e1 + c0 <= 0:
        if c0 == 0.0:
            c0 = 1.0
            log.info("bulk energy vanishes on the initial field; using SAV shift C0 = 1")
        else:
            raise ValueError(f"SAV needs (F(phi0), 1) + C0 > 0, got {e1 + c0!r}")
    return SchemeState(phi0, phi0.copy(), sav_r=math.sqrt(e1 + c0), sav_c0=c0)


def _guard(phi):
    if not np.isfinite(phi).all():
        raise NonFiniteField("step produced non-finite values")


def _finish(grid, cfg, state, phi_next, eta, branch, gate, report, fallback=False):
    _guard(phi_next)
    flow = cfg.flow
    return StepOutcome(
        phi_next=phi_next,
        eta=eta,
        branch=branch,
        gate_value=gate,
        solver=report,
        energy=total_energy(grid, phi_next, flow),
        modified_energy=modified_energy(grid, phi_next, state.phi_n, flow),
        mass=float(np.mean(phi_next)),
        sn_proxy=sn_proxy(grid, state.phi_n, state.phi_nm1, cfg.dt),
        fallback=fallback,
    )


def _split(state, cfg):
    grid, flow, dt = cfg.grid, cfg.flow, cfg.dt
    phi_star = 1.5 * state.phi_n - 0.5 * state.phi_nm1
    p = compute_p(grid, state.phi_n, state.phi_nm1, flow, dt)
    q = compute_q(grid, phi_star, flow, dt)
    return phi_star, p, q


def _root_solve(state, cfg, phi_star, p, q):
    grid, dt = cfg.grid, cfg.dt
    poly = assemble_g(grid, p, q, state.phi_n, phi_star, dt)
    report = solve_eta(
        poly,
        dt,
        cfg.eta_tol,
        field_scale=energy_scale(grid, state.phi_n),
        widen=cfg.bracket_widen,
    )
    if report.degenerate:
        raise DegenerateEquation(
            "multiplier equation is degenerate (g is identically zero); any eta solves it",
            report,
        )
    return p + report.eta * (dt * q), report


def step_original_lm(state: SchemeState, cfg: RunConfig) -> StepOutcome:
    grid = cfg.grid
    phi_star, p, q = _split(state, cfg)
    gate = gate_metric(grid, p + cfg.dt * q, state.phi_n, cfg.dt)
    phi_next, report = _root_solve(state, cfg, phi_star, p, q)
    return _finish(grid, cfg, state, phi_next, report.eta, "root-solved", gate, report)


def step_modified_lm(state: SchemeState, cfg: RunConfig) -> StepOutcome:
    grid = cfg.grid
    phi_star, p, q = _split(state, cfg)
    phi_tilde = p + cfg.dt * q
    gate = gate_metric(grid, phi_tilde, state.phi_n, cfg.dt)
    if gate > cfg.gate_tol:
        try:
            phi_next, report = _root_solve(state, cfg, phi_star, p, q)
        except MultiplierError as exc:
            log.warning("step %d: %s; taking eta = 1", state.step + 1, exc)
            return _finish(grid, cfg, state, phi_tilde, 1.0, "gated-eta-one", gate, exc.report, True)
        return _finish(grid, cfg, state, phi_next, report.eta, "root-solved", gate, report)
    return _finish(grid, cfg, state, phi_tilde, 1.0, "gated-eta-one", gate, None)


def _sav_scalar(b_u_inc, b_v, r_n, dt):
    """Solve ``rho (1 + dt/4 (b, v)) = 2 r_n + (b, u - phi_n) / 2`` for ``rho = r_next + r_n``."""
    return (2.0 * r_n + 0.5 * b_u_inc) / (1.0 + 0.25 * dt * b_v)


def sav_energy(grid: Grid, phi, r, flow: FlowSpec) -> float:
    """``1/2 (L phi, phi) + r**2``, the quantity the SAV scheme dissipates."""
    quad = 0.5 * spectral_inner_product(grid, np.fft.rfft2(phi), symbol=flow.sigma_L(grid))
    return quad + r * r


def step_sav_cn(state: SchemeState, cfg: RunConfig) -> StepOutcome:
    """One step of the Crank-Nicolson SAV scheme.

    With ``b = F'(phi*) / sqrt((F(phi*), 1) + C0)`` and ``A = I + dt/2 GL``::

        u = A^{-1} (I - dt/2 GL) phi_n,   v = A^{-1} G b
        phi_next = u - dt/2 (r_next + r_n) v
        r_next - r_n = (b, phi_next - phi_n) / 2
    """
    grid, flow, dt = cfg.grid, cfg.flow, cfg.dt
    if state.sav_r is None:
        raise ValueError("state has no SAV variable; bootstrap it with a sav-cn config")
    phi_n = state.phi_n
    phi_star = 1.5 * phi_n - 0.5 * state.phi_nm1
    e1 = bulk_energy(grid, phi_star) + state.sav_c0
    if not e1 > 0:
        raise ValueError(f"shifted bulk energy must be positive for SAV, got {e1!r}")
    b = potential_Fprime(phi_star) / math.sqrt(e1)

    gl = flow.sigma_GL(grid)
    denom = 1.0 + 0.5 * dt * gl
    u_inc = np.fft.irfft2(-dt * gl * np.fft.rfft2(phi_n) / denom, s=grid.shape)
    B = np.fft.rfft2(b)
    if flow.dealias:
        B = B * grid.dealias_mask
    v = np.fft.irfft2(flow.sigma_G(grid) * B / denom, s=grid.shape)

    h = grid.cell_area
    b_u_inc = float(np.sum(b * u_inc)) * h
    b_v = float(np.sum(b * v)) * h
    rho = _sav_scalar(b_u_inc, b_v, state.sav_r, dt)
    phi_next = phi_n + u_inc - 0.5 * dt * rho * v
    r_next = rho - state.sav_r
    _guard(phi_next)

    e1_next = bulk_energy(grid, phi_next) + state.sav_c0
    ratio = r_next / math.sqrt(e1_next) if e1_next > 0 else math.nan
    return StepOutcome(
        phi_next=phi_next,
        eta=ratio,
        branch="sav",
        gate_value=math.nan,
        solver=None,
        energy=total_energy(grid, phi_next, flow),
        modified_energy=sav_energy(grid, phi_next, r_next, flow),
        mass=float(np.mean(phi_next)),
        sn_proxy=sn_proxy(grid, phi_n, state.phi_nm1, dt),
        sav_r=r_next,
    )


_STEPPERS = {
    "original-lm": step_original_lm,
    "modified-lm": step_modified_lm,
    "sav-cn": step_sav_cn,
}


def step(state: SchemeState, cfg: RunConfig) -> StepOutcome:
    return _STEPPERS[cfg.scheme](state, cfg)


def advance(state: SchemeState, out: StepOutcome, dt) -> SchemeState:
    n = state.step + 1
    return SchemeState(
        phi_n=out.phi_next,
        phi_nm1=state.phi_n,
        t=n * dt,
        step=n,
        sav_r=out.sav_r if out.sav_r is not None else state.sav_r,
        sav_c0=state.sav_c0,
    )


class MemorySink:
    """Collects records and snapshots in lists."""

    def __init__(self):
        self.records = []
        self.snapshots = []

    def record(self, rec):
        self.records.append(rec)

    def snapshot(self, step, t, phi):
        self.snapshots.append((step, t, phi.copy()))


def run(cfg: RunConfig, phi0, sink=None) -> SchemeState:
    """Integrate from ``t = 0`` to ``cfg.t_final`` with a fixed step.

    ``sink`` receives one :class:`TimeSeriesRecord` per step through
    ``sink.record`` and, every ``cfg.snapshot_every`` steps (including step
    0), the field through ``sink.snapshot(step, t, phi)``.
    Step failures are re-raised with ``step`` and ``t`` attached.
    """
    state = bootstrap(phi0, cfg)
    stepper = _STEPPERS[cfg.scheme]
    every = cfg.snapshot_every
    if sink is not None and every:
        sink.snapshot(0, 0.0, state.phi_n)
    for n in range(1, cfg.n_steps + 1):
        try:
            out = stepper(state, cfg)
        except (MultiplierError, NonFiniteField) as exc:
            exc.step, exc.t = n, n * cfg.dt
            raise
        state = advance(state, out, cfg.dt)
        if sink is not None:
            sink.record(TimeSeriesRecord.from_outcome(n, state.t, out))
            if every and n % every == 0:
                sink.snapshot(n, state.t, state.phi_n)
    return state
