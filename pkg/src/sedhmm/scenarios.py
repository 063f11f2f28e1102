"""Concrete set-ups (mesh, bed, flow, law) built from a :class:`RunConfig`."""

from __future__ import annotations

import numpy as np

from .config import RunConfig
from .grid import FlowState, Grid
from .hydro import Boundary
from .scaling import Scales
from .sediment import Grass, MeyerPeterMuller, SedimentLaw


def dune_bed_1d(x) -> np.ndarray:
    """Single sin^2 dune of height 1 m on ``300 <= x <= 500``."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 300.0) & (x <= 500.0)
    return np.where(inside, np.sin((x - 300.0) * np.pi / 200.0) ** 2, 0.0)


def dune_bed_2d(x, y) -> np.ndarray:
    """Product of sin^2 bumps on ``[300, 500] x [400, 600]``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = (x >= 300.0) & (x <= 500.0) & (y >= 400.0) & (y <= 600.0)
    bump = np.sin((x - 300.0) * np.pi / 200.0) ** 2 * np.sin((y - 400.0) * np.pi / 200.0) ** 2
    return np.where(inside, bump, 0.0)


def make_grid(cfg: RunConfig) -> Grid:
    if cfg.ndim == 1:
        return Grid.line(cfg.n, cfg.length)
    return Grid.plane(cfg.n, cfg.ny, cfg.length, cfg.width)


def make_law(cfg: RunConfig) -> SedimentLaw:
    if cfg.law == "grass":
        return Grass(A_g=cfg.A_g, m=cfg.m, gamma=cfg.gamma)
    eps = cfg.A_g / (1.0 - cfg.gamma)
    return MeyerPeterMuller.from_critical_velocity(cfg.u_cr, eps, gamma=cfg.gamma, g=cfg.gravity)


def make_bed(cfg: RunConfig, grid: Grid) -> np.ndarray:
    if grid.ndim == 1:
        return dune_bed_1d(grid.x)
    X, Y = grid.mesh()
    return dune_bed_2d(X, Y)


def make_flow(cfg: RunConfig, bed: np.ndarray) -> FlowState:
    """Flat water surface at ``water_level`` carrying unit discharge ``discharge``."""
    h = cfg.water_level - bed
    hu = np.full_like(h, cfg.discharge)
    return FlowState(h, hu, np.zeros_like(h) if bed.ndim == 2 else None)


def make_boundary(cfg: RunConfig, scales: Scales | None = None) -> Boundary:
    q = cfg.discharge if scales is None else cfg.discharge / scales.discharge
    return Boundary(discharge=q)


def make_scales(cfg: RunConfig) -> Scales:
    L, H, U = cfg.scales
    return Scales(L, H, U)


def make_sim_config(cfg: RunConfig):
    """Driver configuration (SI units) matching ``cfg``."""
    from .driver import MacroConfig, SimConfig
    from .hydro import SteadyConfig
    from .linalg import SolverParams

    return SimConfig(
        grid=make_grid(cfg),
        law=make_law(cfg),
        t_end=cfg.T,
        boundary=make_boundary(cfg),
        macro=MacroConfig(cfl=cfg.bed_cfl, K=cfg.K),
        steady=SteadyConfig(tol=cfg.steady_tol, max_iter=cfg.steady_max_iter,
                            cfl=cfg.steady_cfl),
        solver=SolverParams(tol=cfg.linear_tol, max_iter=cfg.linear_max_iter,
                            omega=cfg.ssor_omega),
        scheme=cfg.scheme,
        gravity=cfg.gravity,
        scales=make_scales(cfg) if cfg.nondimensional else Scales(),
    )
