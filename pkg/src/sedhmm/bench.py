"""Reference runs, convergence and timing studies, and spread-angle extraction."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .driver import RunRecord, run
from .grid import FlowState, Grid
from .hydro import SteadyConfig, coupled_roe_run_1d, solve_steady
from .scenarios import (make_bed, make_boundary, make_flow, make_grid, make_law, make_scales,
                        make_sim_config)

CACHE_VERSION = 1


def cache_dir() -> Path:
    root = os.environ.get("SEDHMM_CACHE")
    path = Path(root) if root else Path.home() / ".cache" / "sedhmm"
    path.mkdir(parents=True, exist_ok=True)
    return path


@dataclass
class CoupledRun:
    grid: Grid
    state: FlowState
    bed: np.ndarray
    steps: int
    seconds: float


def run_coupled(cfg: RunConfig) -> CoupledRun:
    """Coupled Roe run of a 1D scenario, started from the steady flow on the initial bed.

    Computation happens in scaled units when ``cfg.nondimensional``; results are
    returned in SI units.  ``seconds`` covers the coupled march only.
    """
    if cfg.ndim != 1:
        raise ValueError("the coupled reference solver is one-dimensional")
    scales = make_scales(cfg) if cfg.nondimensional else None
    grid = make_grid(cfg)
    bed = make_bed(cfg, grid)
    flow = make_flow(cfg, bed)
    law = make_law(cfg)
    g, t_end = cfg.gravity, cfg.T
    if scales is not None:
        grid, bed, flow = scales.grid(grid), scales.bed(bed), scales.state(flow)
        law, g, t_end = scales.law(law), scales.g(g), scales.t(t_end)
    boundary = make_boundary(cfg, scales)
    steady = SteadyConfig(tol=cfg.steady_tol, max_iter=cfg.steady_max_iter, cfl=cfg.steady_cfl,
                          gravity=g, boundary=boundary)
    flow = solve_steady(bed, grid, steady, flow).state
    t0 = time.perf_counter()
    state, bed, steps = coupled_roe_run_1d(flow, bed, grid, law, t_end, g=g, boundary=boundary,
                                           cfl=cfg.steady_cfl)
    seconds = time.perf_counter() - t0
    if scales is not None:
        grid, state, bed = scales.unscale_grid(grid), scales.unscale_state(state), scales.unscale_bed(bed)
    return CoupledRun(grid, state, bed, steps, seconds)


def _reference_key(cfg: RunConfig) -> str:
    payload = dataclasses.asdict(cfg)
    for unused in ("preset", "K", "scheme", "bed_cfl", "linear_tol", "linear_max_iter",
                   "ssor_omega"):
        payload.pop(unused)
    payload["version"] = CACHE_VERSION
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def coupled_reference(cfg: RunConfig, n_ref: int = 8192, use_cache: bool = True) -> CoupledRun:
    """Fine-mesh coupled solution for ``cfg`` (cached on disk by its parameters)."""
    ref_cfg = replace(cfg, n=n_ref)
    path = cache_dir() / f"coupled_{_reference_key(ref_cfg)}.npz"
    if use_cache and path.exists():
        data = np.load(path)
        grid = Grid.line(int(data["n"]), float(data["length"]))
        state = FlowState(data["h"], data["hu"])
        return CoupledRun(grid, state, data["bed"], int(data["steps"]), float(data["seconds"]))
    run = run_coupled(ref_cfg)
    if use_cache:
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, n=run.grid.nx, length=run.grid.lx, h=run.state.h, hu=run.state.hu,
                 bed=run.bed, steps=run.steps, seconds=run.seconds)
        tmp.replace(path)
    return run


def run_multiscale(cfg: RunConfig) -> RunRecord:
    """Multiscale run of a preset-derived configuration (SI in and out)."""
    sim = make_sim_config(cfg)
    bed = make_bed(cfg, sim.grid)
    return run(sim, bed, make_flow(cfg, bed), nondimensional=cfg.nondimensional)


# ------------------------------------------------------------- convergence

def restrict(fine: np.ndarray, n: int) -> np.ndarray:
    """Cell averages of a 1D fine-mesh field on ``n`` coarse cells."""
    fine = np.asarray(fine, dtype=float)
    if fine.size % n:
        raise ValueError(f"{fine.size} fine cells do not nest in {n} coarse cells")
    return fine.reshape(n, -1).mean(axis=1)


def l1_error(a, b, dx: float) -> float:
    return float(np.sum(np.abs(np.asarray(a) - np.asarray(b))) * dx)


def pairwise_orders(errors) -> np.ndarray:
    """``log2(e_N / e_2N)`` for consecutive entries; the first entry is NaN."""
    e = np.asarray(errors, dtype=float)
    out = np.full(e.size, np.nan)
    out[1:] = np.log2(e[:-1] / e[1:])
    return out


def fitted_order(ns, errors) -> float:
    """Least-squares order ``p`` in ``e ~ N^-p``."""
    return -float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)),
                             1)[0])


@dataclass
class ConvergenceRow:
    scheme: str
    n: int
    error: float
    order: float
    seconds: float


@dataclass
class ConvergenceReport:
    rows: list
    n_ref: int

    def errors(self, scheme: str) -> tuple[np.ndarray, np.ndarray]:
        sel = [r for r in self.rows if r.scheme == scheme]
        return np.array([r.n for r in sel]), np.array([r.error for r in sel])

    def error(self, scheme: str, n: int) -> float:
        for r in self.rows:
            if r.scheme == scheme and r.n == n:
                return r.error
        raise KeyError((scheme, n))

    def order(self, scheme: str, n: int) -> float:
        """Pairwise order ending at mesh ``n``."""
        for r in self.rows:
            if r.scheme == scheme and r.n == n:
                return r.order
        raise KeyError((scheme, n))

    def fitted(self, scheme: str, n_min: int, n_max: int) -> float:
        ns, es = self.errors(scheme)
        keep = (ns >= n_min) & (ns <= n_max)
        return fitted_order(ns[keep], es[keep])

    def table(self) -> list[dict]:
        return [dataclasses.asdict(r) for r in self.rows]


def convergence_study(cfg: RunConfig, ns=(128, 256, 512, 1024),
                      schemes=("first", "second", "second-no-eps"), n_ref: int = 8192,
                      use_cache: bool = True) -> ConvergenceReport:
    """Bed errors of each scheme against a restricted coupled reference."""
    if n_ref < 8 * max(ns):
        raise ValueError("the reference mesh must be at least 8x the finest test mesh")
    ref = coupled_reference(cfg, n_ref=n_ref, use_cache=use_cache)
    rows = []
    for scheme in schemes:
        errs = []
        secs = []
        for n in ns:
            c = replace(cfg, n=int(n), scheme=scheme)
            t0 = time.perf_counter()
            rec = run_multiscale(c)
            secs.append(time.perf_counter() - t0)
            errs.append(l1_error(rec.bed, restrict(ref.bed, int(n)), cfg.length / n))
        for n, e, p, sec in zip(ns, errs, pairwise_orders(errs), secs):
            rows.append(ConvergenceRow(scheme, int(n), e, float(p), sec))
    return ConvergenceReport(rows, n_ref)


# ------------------------------------------------------------------ timing

@dataclass
class TimingRow:
    A_g: float
    n: int
    method: str
    seconds: float
    steps: int


def warm_up() -> None:
    """Compile the kernels once so that timings exclude JIT work."""
    tiny = replace(RunConfig(), n=16, T=2000.0)
    run_multiscale(tiny)
    run_coupled(tiny)


def timing_study(cfg: RunConfig, a_values=(0.01, 0.005, 0.001), ns=(256, 512),
                 methods=("coupled", "first", "second")) -> list[TimingRow]:
    """Wall-clock of the coupled solver and the multiscale schemes to ``T = 150 / eps``.

    The coupled time covers its march only; the multiscale time covers the
    whole run including every steady solve.
    """
    warm_up()
    rows = []
    for a in a_values:
        for n in ns:
            base = replace(cfg, A_g=float(a), n=int(n))
            base = replace(base, T=150.0 / make_law(base).epsilon)
            for method in methods:
                if method == "coupled":
                    res = run_coupled(base)
                    rows.append(TimingRow(a, n, method, res.seconds, res.steps))
                else:
                    t0 = time.perf_counter()
                    rec = run_multiscale(replace(base, scheme=method))
                    rows.append(TimingRow(a, n, method, time.perf_counter() - t0,
                                          rec.macro_steps))
    return rows


# ------------------------------------------------------------ spread angle

class DegenerateBedError(ValueError):
    """No deformation to measure."""


def _ridge(col: np.ndarray, y: np.ndarray) -> float:
    k = int(np.argmax(col))
    if 0 < k < col.size - 1:
        a, b, c = col[k - 1], col[k], col[k + 1]
        den = a - 2.0 * b + c
        if den < 0.0:
            return float(y[k] + 0.5 * (a - c) / den * (y[1] - y[0]))
    return float(y[k])


def spread_angle(bed: np.ndarray, grid: Grid, x_start: float, level: float = 0.2,
                 lobe: str = "upper", floor: float = 1e-8) -> float:
    """Angle (degrees) between the x-axis and one lobe of a star-shaped bed.

    Columns downstream of ``x_start`` (the end of the initial dune) whose
    lobe reaches ``level * max(bed)`` contribute the position of their
    maximum in y (refined by a parabola through the top three cells); a
    least-squares line through these ridge points gives the angle.  The
    lobe is the half ``y > Ly/2`` or ``y < Ly/2``.
    """
    bed = np.asarray(bed, dtype=float)
    top = float(np.max(bed))
    if not top > floor:
        raise DegenerateBedError(f"bed maximum {top:.3e} is below the floor {floor:g}")
    x, y = grid.x, grid.y
    mid = 0.5 * grid.ly
    half = y > mid if lobe == "upper" else y < mid
    ys = y[half] if lobe == "upper" else (2 * mid - y[half])[::-1]
    xs, rs = [], []
    for i in np.flatnonzero(x > x_start):
        col = bed[i, half] if lobe == "upper" else bed[i, half][::-1]
        if col.max() >= level * top:
            xs.append(x[i])
            rs.append(_ridge(col, ys))
    if len(xs) < 3:
        raise DegenerateBedError("fewer than three ridge points above the level set")
    slope = np.polyfit(xs, rs, 1)[0]
    return float(np.degrees(np.arctan(slope)))
