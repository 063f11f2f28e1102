"""Shallow-water solvers on a frozen bed, and the fully coupled 1D reference.

Both use an f-wave Roe decomposition with the hydrostatic bed source folded
into the momentum jump, so a lake at rest produces no waves, plus a
minmod-limited second-order correction.  The compiled loops live in
:mod:`sedhmm._kernels`; this module validates inputs and maps results back to
:class:`~sedhmm.grid.FlowState`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .grid import FlowState, Grid, interior, pad
from .sediment import SedimentLaw

_KINDS = {
    "transmissive": K.TRANSMISSIVE,
    "reflective": K.REFLECTIVE,
    "discharge": K.DISCHARGE,
    "periodic": K.PERIODIC,
}


class SolverError(RuntimeError):
    """A solver left its domain of validity (positivity, finiteness, ...)."""


class SubcriticalityWarning(RuntimeWarning):
    """Raised as a warning when a steady state reaches Froude >= 1."""


@dataclass(frozen=True)
class Boundary:
    """Boundary kinds per side plus the prescribed unit discharge.

    Kinds are ``"discharge"`` (``hu = discharge``, ``hv = 0``, depth
    extrapolated), ``"transmissive"``, ``"reflective"`` and ``"periodic"``.
    """

    left: str = "discharge"
    right: str = "transmissive"
    bottom: str = "reflective"
    top: str = "reflective"
    discharge: float = 1.0

    def __post_init__(self):
        for side in (self.left, self.right, self.bottom, self.top):
            if side not in _KINDS:
                raise ValueError(f"unknown boundary kind {side!r}")
        if (self.left == "periodic") != (self.right == "periodic"):
            raise ValueError("periodic closure must be used on both x sides")
        if (self.bottom == "periodic") != (self.top == "periodic"):
            raise ValueError("periodic closure must be used on both y sides")

    def codes(self):
        return (_KINDS[self.left], _KINDS[self.right], _KINDS[self.bottom], _KINDS[self.top])

    @property
    def x_periodic(self) -> bool:
        return self.left == "periodic"

    @property
    def y_periodic(self) -> bool:
        return self.bottom == "periodic"


@dataclass(frozen=True)
class SteadyConfig:
    """Settings of the pseudo-time steady solver.

    The residual is ``sum|dh| + sum|dhu| (+ sum|dhv|)`` between successive
    iterates, unweighted by cell size.  Depth and discharge differences are
    divided by ``depth_scale`` and ``discharge_scale`` so the tolerance keeps
    its meaning when a run is carried out in dimensional units.
    """

    tol: float = 1e-6
    max_iter: int = 20000
    cfl: float = 0.9
    gravity: float = 9.81
    depth_scale: float = 1.0
    discharge_scale: float = 1.0
    second_order: bool = True
    boundary: Boundary = field(default_factory=Boundary)

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("steady tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.cfl <= 1:
            raise ValueError("pseudo-time CFL must lie in (0, 1]")


@dataclass
class SteadyResult:
    state: FlowState
    iterations: int
    residual: float
    converged: bool
    subcritical: bool


def _check_status(status: int, where: str) -> None:
    if status == K.NEGATIVE_DEPTH:
        raise SolverError(f"{where}: water depth became non-positive")
    if status == K.NON_FINITE:
        raise SolverError(f"{where}: non-finite values in the update")
    if status == K.DEFECTIVE:
        raise SolverError(f"{where}: coupled Roe matrix is defective (eigenvalues collide)")


def _padded_bed(bed: np.ndarray, boundary: Boundary) -> np.ndarray:
    bed = np.asarray(bed, dtype=float)
    b = pad(bed)
    if bed.ndim == 1:
        if boundary.x_periodic:
            K.fill_scalar_ghosts_1d(b, True)
        return b
    if boundary.x_periodic:
        b[:2] = b[-4:-2]
        b[-2:] = b[2:4]
    if boundary.y_periodic:
        b[:, :2] = b[:, -4:-2]
        b[:, -2:] = b[:, 2:4]
    return b


def _validate(state: FlowState, bed: np.ndarray) -> None:
    if np.shape(bed) != state.h.shape:
        raise ValueError("bed and state shapes differ")
    if not np.all(state.h > 0):
        raise SolverError("initial water depth must be positive")


def roe_step_fixed_bed(state: FlowState, bed: np.ndarray, grid: Grid, dt: float,
                       g: float = 9.81, boundary: Boundary | None = None,
                       second_order: bool = True) -> FlowState:
    """Advance the shallow-water state by one step of size ``dt`` over a frozen bed."""
    boundary = boundary or Boundary()
    _validate(state, bed)
    l, r, b, t = boundary.codes()
    B = _padded_bed(bed, boundary)
    h, hu = pad(state.h), pad(state.hu)
    if grid.ndim == 1:
        status, smax = K.step_fixed_1d(h, hu, B, g, dt / grid.dx, l, r,
                                       boundary.discharge, boundary.discharge, second_order)
        _check_status(status, "roe_step_fixed_bed")
        if smax * dt / grid.dx > 1.0 + 1e-12:
            warnings.warn("time step violates the CFL bound", RuntimeWarning, stacklevel=2)
        return FlowState(interior(h), interior(hu))
    hv = pad(state.hv if state.hv is not None else np.zeros_like(state.h))
    status, smx, smy = K.step_fixed_2d(h, hu, hv, B, g, dt, grid.dx, grid.dy, l, r, b, t,
                                       boundary.discharge, boundary.discharge, second_order)
    _check_status(status, "roe_step_fixed_bed")
    if dt * max(smx / grid.dx, smy / grid.dy) > 1.0 + 1e-12:
        warnings.warn("time step violates the CFL bound", RuntimeWarning, stacklevel=2)
    return FlowState(interior(h), interior(hu), interior(hv))


def solve_steady(bed: np.ndarray, grid: Grid, cfg: SteadyConfig,
                 initial: FlowState) -> SteadyResult:
    """March in pseudo-time until successive iterates differ by less than ``cfg.tol``.

    Non-convergence within ``cfg.max_iter`` is reported through
    ``SteadyResult.converged`` rather than raised.
    """
    _validate(initial, bed)
    l, r, b, t = cfg.boundary.codes()
    q = cfg.boundary.discharge
    B = _padded_bed(bed, cfg.boundary)
    h, hu = pad(initial.h), pad(initial.hu)
    if grid.ndim == 1:
        status, iters, res = K.steady_fixed_1d(h, hu, B, cfg.gravity, cfg.cfl, cfg.tol,
                                               cfg.max_iter, l, r, q, q, cfg.second_order,
                                               1.0 / cfg.depth_scale, 1.0 / cfg.discharge_scale)
        _check_status(status, "solve_steady")
        state = FlowState(interior(h), interior(hu))
    else:
        hv = pad(initial.hv if initial.hv is not None else np.zeros_like(initial.h))
        status, iters, res = K.steady_fixed_2d(h, hu, hv, B, cfg.gravity, grid.dx, grid.dy,
                                               cfg.cfl, cfg.tol, cfg.max_iter, l, r, b, t,
                                               q, q, cfg.second_order,
                                               1.0 / cfg.depth_scale, 1.0 / cfg.discharge_scale)
        _check_status(status, "solve_steady")
        state = FlowState(interior(h), interior(hu), interior(hv))
    subcritical = bool(np.all(state.froude(cfg.gravity) < 1.0))
    if not subcritical:
        warnings.warn("steady state is not subcritical everywhere", SubcriticalityWarning,
                      stacklevel=2)
    return SteadyResult(state, int(iters), float(res), status == K.OK, subcritical)


def march_fixed_bed_1d(state: FlowState, bed: np.ndarray, grid: Grid, t_end: float,
                       g: float = 9.81, boundary: Boundary | None = None, cfl: float = 0.9,
                       second_order: bool = True) -> tuple[FlowState, int]:
    """Time-accurate fixed-bed march; returns the final state and the step count."""
    boundary = boundary or Boundary()
    _validate(state, bed)
    l, r, _, _ = boundary.codes()
    B = _padded_bed(bed, boundary)
    h, hu = pad(state.h), pad(state.hu)
    status, steps = K.march_fixed_1d(h, hu, B, g, grid.dx, cfl, t_end, l, r,
                                     boundary.discharge, boundary.discharge, second_order)
    _check_status(status, "march_fixed_bed_1d")
    return FlowState(interior(h), interior(hu)), int(steps)


def coupled_roe_run_1d(state: FlowState, bed: np.ndarray, grid: Grid, law: SedimentLaw,
                       t_end: float, g: float = 9.81, boundary: Boundary | None = None,
                       cfl: float = 0.9, second_order: bool = True):
    """Integrate the coupled flow and bed equations to ``t_end``.

    Returns ``(state, bed, steps)``.  Units are whatever ``state``, ``grid``,
    ``g`` and ``law`` share.
    """
    boundary = boundary or Boundary()
    _validate(state, bed)
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    l, r, _, _ = boundary.codes()
    kind, par = law.kernel_params()
    B = _padded_bed(bed, boundary)
    h, hu = pad(state.h), pad(state.hu)
    status, steps = K.march_coupled_1d(h, hu, B, g, law.epsilon, kind, par, grid.dx, cfl,
                                       t_end, l, r, boundary.discharge, boundary.discharge,
                                       second_order)
    _check_status(status, "coupled_roe_run_1d")
    return FlowState(interior(h), interior(hu)), interior(B).copy(), int(steps)
