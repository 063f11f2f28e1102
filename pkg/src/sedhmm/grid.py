"""Uniform cell-centred meshes, flow states and their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GHOSTS = 2


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred mesh on ``[0, lx] x [0, ly]``.

    A 1D mesh has ``ny == 1`` and ``ly`` unused.  Field arrays have shape
    ``(nx,)`` in 1D and ``(nx, ny)`` in 2D, with the first index along x.
    """

    nx: int
    lx: float = 1.0
    ny: int = 1
    ly: float = 1.0
    ndim: int = 1

    def __post_init__(self):
        if self.nx < 3 or (self.ndim == 2 and self.ny < 3):
            raise ValueError("a mesh needs at least 3 cells per direction")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("domain lengths must be positive")
        if self.ndim not in (1, 2):
            raise ValueError("ndim must be 1 or 2")

    @classmethod
    def line(cls, n: int, length: float = 1.0) -> "Grid":
        return cls(nx=n, lx=length)

    @classmethod
    def plane(cls, nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> "Grid":
        return cls(nx=nx, lx=lx, ny=ny, ly=ly, ndim=2)

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx,) if self.ndim == 1 else (self.nx, self.ny)

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinates broadcast to field shape (2D only)."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def cell_area(self) -> float:
        return self.dx if self.ndim == 1 else self.dx * self.dy

    def scaled(self, length_scale: float) -> "Grid":
        return Grid(self.nx, self.lx / length_scale, self.ny, self.ly / length_scale, self.ndim)


@dataclass
class FlowState:
    """Conserved shallow-water variables ``h``, ``hu`` and, in 2D, ``hv``."""

    h: np.ndarray
    hu: np.ndarray
    hv: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.hu = np.asarray(self.hu, dtype=float)
        if self.hv is not None:
            self.hv = np.asarray(self.hv, dtype=float)
        if self.hu.shape != self.h.shape or (self.hv is not None and self.hv.shape != self.h.shape):
            raise ValueError("state components must share one shape")

    @classmethod
    def from_velocity(cls, h, u, v=None) -> "FlowState":
        h = np.asarray(h, dtype=float)
        hv = None if v is None else h * np.asarray(v, dtype=float)
        return cls(h, h * np.asarray(u, dtype=float), hv)

    @property
    def ndim(self) -> int:
        return self.h.ndim

    @property
    def u(self) -> np.ndarray:
        return self.hu / self.h

    @property
    def v(self) -> np.ndarray:
        if self.hv is None:
            return np.zeros_like(self.h)
        return self.hv / self.h

    def speed(self) -> np.ndarray:
        return np.hypot(self.u, self.v) if self.hv is not None else np.abs(self.u)

    def froude(self, g: float) -> np.ndarray:
        return self.speed() / np.sqrt(g * self.h)

    def copy(self) -> "FlowState":
        return FlowState(self.h.copy(), self.hu.copy(), None if self.hv is None else self.hv.copy())

    def scaled(self, height_scale: float, velocity_scale: float) -> "FlowState":
        q = height_scale * velocity_scale
        return FlowState(self.h / height_scale, self.hu / q,
                         None if self.hv is None else self.hv / q)


def pad(a: np.ndarray) -> np.ndarray:
    """Copy with two edge-extrapolated ghost layers on every side."""
    return np.pad(np.asarray(a, dtype=float), GHOSTS, mode="edge")


def interior(a: np.ndarray) -> np.ndarray:
    sl = slice(GHOSTS, -GHOSTS)
    return a[sl] if a.ndim == 1 else a[sl, sl]


def write_state_csv(path, grid: Grid, state: FlowState, bed: np.ndarray) -> None:
    """Write a state with 17 significant digits (x,h,u,B or x,y,h,u,v,B)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        fmt = "%.17g"
        if grid.ndim == 1:
            w.writerow(["x", "h", "u", "B"])
            for row in zip(grid.x, state.h, state.u, bed):
                w.writerow([fmt % v for v in row])
        else:
            w.writerow(["x", "y", "h", "u", "v", "B"])
            X, Y = grid.mesh()
            cols = [X, Y, state.h, state.u, state.v, bed]
            for row in zip(*(c.ravel() for c in cols)):
                w.writerow([fmt % v for v in row])


def read_state_csv(path) -> tuple[Grid, FlowState, np.ndarray]:
    """Inverse of :func:`write_state_csv` for uniform meshes starting at 0."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    if "y" not in names:
        x = np.atleast_1d(data["x"])
        dx = x[1] - x[0]
        grid = Grid.line(x.size, dx * x.size)
        return grid, FlowState.from_velocity(data["h"], data["u"]), np.array(data["B"])
    x = np.unique(data["x"])
    y = np.unique(data["y"])
    grid = Grid.plane(x.size, y.size, (x[1] - x[0]) * x.size, (y[1] - y[0]) * y.size)
    shp = grid.shape
    state = FlowState.from_velocity(data["h"].reshape(shp), data["u"].reshape(shp),
                                    data["v"].reshape(shp))
    return grid, state, data["B"].reshape(shp).copy()
