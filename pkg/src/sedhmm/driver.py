"""Multiscale driver: steady sampling, corrections and macro bed steps.

Each sample solves the steady flow on the current bed, optionally computes
the ``O(eps)`` flow correction, then takes ``K`` macro steps of the bed in
rescaled time ``tau = eps t``.  Between samples the steady state is carried
forward by the tau-correction, which predicts how the flow answers a bed
change without re-solving the flow.

Three scheme variants are available:

``first``
    single-stage bed update, no ``O(eps)`` flow correction.
``second``
    two-stage bed update with the ``O(eps)`` flow correction.
``second-no-eps``
    two-stage bed update without the flow correction (ablation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bed import (BedSpeeds, cfl_dtau, euler_bed_step, lambda1_1d, lambda_S_2d,
                  rk2_bed_step)
from .correction import (CorrectionEps, eps_correction_1d,
                         eps_correction_2d, tau_correction_1d, tau_correction_2d)
from .grid import FlowState, Grid
from .hydro import Boundary, SolverError, SteadyConfig, solve_steady
from .linalg import SolverParams
from .scaling import Scales
from .sediment import SedimentLaw

SCHEMES = ("first", "second", "second-no-eps")


@dataclass(frozen=True)
class MacroConfig:
    """Bed stepping controls.

    ``max_dt`` caps the physical time covered by one macro step; it is the
    step used when every bed speed vanishes.
    """

    cfl: float = 0.65
    K: int = 2
    max_dt: float = np.inf

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise ValueError("bed CFL must lie in (0, 1)")
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if not self.max_dt > 0:
            raise ValueError("max_dt must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Everything a multiscale run needs, in one unit system.

    ``scales`` records the characteristic length, height and velocity of the
    problem; they drive :func:`nondimensionalize` and the scale-aware steady
    residual.  ``floor`` guards ``|u|^2 - g h`` and is expressed in
    dimensionless units.
    """

    grid: Grid
    law: SedimentLaw
    t_end: float
    boundary: Boundary = field(default_factory=Boundary)
    macro: MacroConfig = field(default_factory=MacroConfig)
    steady: SteadyConfig = field(default_factory=SteadyConfig)
    solver: SolverParams = field(default_factory=lambda: SolverParams(tol=1e-6))
    scheme: str = "second"
    gravity: float = 9.81
    scales: Scales = field(default_factory=Scales)
    floor: float = 1e-8

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not self.t_end > 0:
            raise ValueError("end time must be positive")


@dataclass
class RunRecord:
    """Per-macro-step log plus the final fields (in the caller's units)."""

    grid: Grid
    state: FlowState
    bed: np.ndarray
    log: list = field(default_factory=list)
    t: float = 0.0
    samples: int = 0
    macro_steps: int = 0
    steady_failures: int = 0
    wall: dict = field(default_factory=lambda: {"steady": 0.0, "corrections": 0.0,
                                                "macro": 0.0})

    @property
    def wall_total(self) -> float:
        return sum(self.wall.values())


def nondimensionalize(config: SimConfig) -> SimConfig:
    """Same problem in units where ``scales`` are all one."""
    sc = config.scales
    if sc.is_identity:
        return config
    g = sc.g(config.gravity)
    boundary = replace(config.boundary, discharge=config.boundary.discharge / sc.discharge)
    return replace(config, grid=sc.grid(config.grid), law=sc.law(config.law),
                   t_end=sc.t(config.t_end), boundary=boundary, gravity=g,
                   macro=replace(config.macro, max_dt=sc.t(config.macro.max_dt)),
                   scales=Scales())


def _combine(a: FlowState, dh, du, dv=None) -> FlowState:
    """State with depth ``a.h + dh`` and velocity ``a.u + du`` (``a.v + dv``)."""
    h = a.h + dh
    u = a.u + du
    if a.hv is None:
        return FlowState.from_velocity(h, u)
    return FlowState.from_velocity(h, u, a.v + dv)


class _Stepper:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.law = cfg.law
        self.eps = cfg.law.epsilon
        self.g = cfg.gravity
        self.ndim = cfg.grid.ndim
        self.floor = cfg.floor * cfg.scales.velocity ** 2
        self.periodic = cfg.boundary.x_periodic
        self.steady_cfg = replace(cfg.steady, gravity=self.g, boundary=cfg.boundary,
                                  depth_scale=cfg.scales.height,
                                  discharge_scale=cfg.scales.discharge)

    def speeds(self, state: FlowState, hats: CorrectionEps | None) -> BedSpeeds:
        if self.ndim == 1:
            return BedSpeeds(lambda1_1d(state.h, state.u, self.law, self.g, self.floor))
        hh = hu = hv = None
        if hats is not None and hats.hat_h is not None:
            hh, hu, hv = hats.hat_h, hats.hat_u, hats.hat_v
        return lambda_S_2d(1, state.h, state.u, state.v, self.law, self.g, self.grid,
                           hh, hu, hv, floor=self.floor)

    def eps_correction(self, steady: FlowState, B) -> CorrectionEps:
        if self.ndim == 1:
            return eps_correction_1d(steady, B, self.law, self.grid, self.g, self.cfg.solver,
                                     self.floor)
        return eps_correction_2d(steady, B, self.law, self.grid, self.g, self.cfg.solver,
                                 self.floor)

    def tau_correction(self, bar: FlowState, B_old, B_new):
        if self.ndim == 1:
            return tau_correction_1d(bar, B_old, B_new, self.g, self.floor)
        return tau_correction_2d(bar, B_old, B_new, self.grid, self.g, self.cfg.solver,
                                 self.floor)


def run(config: SimConfig, B0, initial: FlowState | None = None,
        nondimensional: bool = True) -> RunRecord:
    """Run the multiscale algorithm from bed ``B0`` to ``config.t_end``.

    ``initial`` is the first guess of the steady solver.  By default the
    free surface is flat, one height scale above the highest bed point, and
    the flow carries the boundary discharge.  With ``nondimensional`` the
    computation runs in scaled units and the record is converted back.
    """
    B0 = np.asarray(B0, dtype=float)
    if B0.shape != config.grid.shape or not np.all(np.isfinite(B0)):
        raise ValueError("B0 must be finite and match the grid")
    if initial is None:
        h = B0.max() + config.scales.height - B0
        hu = np.full_like(h, config.boundary.discharge)
        initial = FlowState(h, hu, None if B0.ndim == 1 else np.zeros_like(h))
    sc = config.scales
    if nondimensional and not sc.is_identity:
        cfg = nondimensionalize(config)
        rec = _run(cfg, sc.bed(B0), sc.state(initial))
        rec.grid = config.grid
        rec.state = sc.unscale_state(rec.state)
        rec.bed = sc.unscale_bed(rec.bed)
        rec.t *= sc.time
        for row in rec.log:
            row["t"] *= sc.time
            row["dt"] *= sc.time
        return rec
    return _run(config, B0, initial)


class SubcriticalityLost(SolverError):
    """The sampled steady flow reached Froude number 1 or above."""


def _run(cfg: SimConfig, B0: np.ndarray, initial: FlowState) -> RunRecord:
    st = _Stepper(cfg)
    eps = st.eps
    use_eps = cfg.scheme == "second"
    two_stage = cfg.scheme != "first"
    B = B0.copy()
    guess = initial.copy()
    rec = RunRecord(cfg.grid, initial.copy(), B)
    t = 0.0
    T = cfg.t_end
    done = False
    while not done:
        # sample the steady flow on the current bed
        c0 = time.perf_counter()
        res = solve_steady(B, cfg.grid, st.steady_cfg, guess)
        rec.wall["steady"] += time.perf_counter() - c0
        rec.samples += 1
        if not res.converged:
            rec.steady_failures += 1
        if not res.subcritical:
            fr = float(np.max(res.state.froude(cfg.gravity)))
            raise SubcriticalityLost(f"steady flow at t = {t:g} has Froude number {fr:.4g}; "
                                     "the homogenized model needs subcritical flow")
        bar = res.state
        c0 = time.perf_counter()
        if use_eps and eps > 0.0:
            phi0 = st.eps_correction(bar, B)
        else:
            phi0 = CorrectionEps.zeros(B.shape)
        rec.wall["corrections"] += time.perf_counter() - c0
        epsphi = (eps * phi0.h, eps * phi0.u, None if phi0.v is None else eps * phi0.v)
        hats = phi0 if use_eps else None
        state = _combine(bar, *epsphi)
        for m in range(cfg.macro.K):
            step_start = c0 = time.perf_counter()
            sp_n = st.speeds(state, hats)
            remaining = eps * (T - t)
            dtau = cfl_dtau(sp_n, cfg.grid, cfg.macro.cfl, cap=eps * cfg.macro.max_dt)
            last = dtau >= remaining - 1e-12 * eps * T or eps == 0.0
            if last:
                dtau = remaining
            B_tilde = euler_bed_step(B, sp_n, dtau, cfg.grid, st.periodic)
            rec.wall["macro"] += time.perf_counter() - c0
            c0 = time.perf_counter()
            tau = st.tau_correction(bar, B, B_tilde)
            rec.wall["corrections"] += time.perf_counter() - c0
            c0 = time.perf_counter()
            bar = _combine(bar, tau.h, tau.u, tau.v)
            state = _combine(bar, *epsphi)
            if two_stage:
                sp_np1 = st.speeds(state, hats)
                B = rk2_bed_step(B, sp_n, sp_np1, dtau, cfg.grid, st.periodic, B_tilde=B_tilde)
            else:
                B = B_tilde
            if not np.all(np.isfinite(B)):
                raise SolverError("bed became non-finite")
            dt = dtau / eps if eps > 0.0 else T - t
            t = T if last else t + dt
            rec.wall["macro"] += time.perf_counter() - c0
            rec.macro_steps += 1
            rec.log.append({
                "step": rec.macro_steps, "sample": rec.samples, "tau": eps * t,
                "dtau": dtau, "dt": dt, "t": t, "steady_iterations": res.iterations,
                "steady_residual": res.residual, "steady_converged": int(res.converged),
                "wall": time.perf_counter() - step_start,
            })
            if last:
                done = True
                break
        guess = state
    rec.state = state
    rec.bed = B
    rec.t = t
    return rec
