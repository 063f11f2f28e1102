"""Correction fields of the fast variables.

Two kinds of correction are computed on a steady base flow ``(h, u, v)``:

* the tau-correction, predicting how the steady state responds to a bed
  change ``B_new - B_old``;
* the eps-correction, the ``O(eps)`` deviation of the flow from the steady
  state caused by the bed moving.

The eps-correction (and the 2D part of the tau-correction) needs the
solution of a steady linearized shallow-water system

    d/dx (J_x phi) + d/dy (J_y phi) - L_f(phi) = S,

``J_x = [[u, h, 0], [g, u, 0], [0, 0, u]]``, ``J_y = [[v, 0, h], [0, v, 0],
[g, 0, v]]``, discretized by a first-order flux-based wave decomposition with
Roe-averaged eigenvectors and assembled into one sparse matrix.  Cells on
the x-boundaries carry homogeneous Dirichlet rows; y-boundaries are
reflective walls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .bed import (DEFAULT_FLOOR, central_gradient, froude_denominator, lambda0_1d,
                  lambda_S_2d)
from .grid import FlowState, Grid
from .linalg import SolverParams, bicgstab
from .sediment import SedimentLaw

HARTEN_FRACTION = 0.05


# ------------------------------------------------------------- operators

def op_Lu(u, v, phu, phv, dx: float, dy: float):
    """``phi.grad u + u.grad phi - grad(u.phi)`` in vorticity form.

    With ``w = v_x - u_y`` and ``w_phi = phv_x - phu_y`` the operator is
    ``(-w phv - v w_phi, w phu + u w_phi)``, which is exactly zero for
    y-independent fields with ``v = phv = 0``.
    """
    w = central_gradient(v, dx, 0) - central_gradient(u, dy, 1)
    wp = central_gradient(phv, dx, 0) - central_gradient(phu, dy, 1)
    return -w * phv - v * wp, w * phu + u * wp


def op_Lf(u, v, phu, phv, dx: float, dy: float):
    """Fixing term ``(v_y phu - u_y phv, u_x phv - v_x phu)``."""
    ux, uy = central_gradient(u, dx, 0), central_gradient(u, dy, 1)
    vx, vy = central_gradient(v, dx, 0), central_gradient(v, dy, 1)
    return vy * phu - uy * phv, ux * phv - vx * phu


# -------------------------------------------------------------- results

@dataclass
class CorrectionTau:
    """Response of the steady flow to a bed change (velocity components)."""

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray | None = None
    bar_h: np.ndarray | None = None
    bar_u: np.ndarray | None = None
    bar_v: np.ndarray | None = None


@dataclass
class CorrectionEps:
    """``O(eps)`` flow correction and, in 2D, its auxiliary hat fields."""

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray | None = None
    hat_h: np.ndarray | None = None
    hat_u: np.ndarray | None = None
    hat_v: np.ndarray | None = None

    @classmethod
    def zeros(cls, shape) -> "CorrectionEps":
        z = np.zeros(shape)
        if len(shape) == 1:
            return cls(z, z.copy())
        return cls(z, z.copy(), z.copy(), z.copy(), z.copy(), z.copy())


# ------------------------------------------------------- linear system

def _roe_average(hl, hr, ql, qr):
    sl, sr = np.sqrt(hl), np.sqrt(hr)
    return (sl * ql + sr * qr) / (sl + sr)


def _split_weights(s):
    wp = np.where(s > 0.0, 1.0, np.where(s < 0.0, 0.0, 0.5))
    return wp, 1.0 - wp


def _project(R, Rinv, w):
    return np.einsum("nij,nj,njk->nik", R, w, Rinv)


def _flux_jacobian(h, u, v, g, axis):
    n = h.size
    J = np.zeros((n, 3, 3))
    if axis == 0:
        J[:, 0, 0], J[:, 0, 1] = u, h
        J[:, 1, 0], J[:, 1, 1] = g, u
        J[:, 2, 2] = u
    else:
        J[:, 0, 0], J[:, 0, 2] = v, h
        J[:, 1, 1] = v
        J[:, 2, 0], J[:, 2, 2] = g, v
    return J


def _eigenvectors(hh, g, axis):
    n = hh.size
    a = np.sqrt(hh / g)
    R = np.zeros((n, 3, 3))
    R[:, 0, 0], R[:, 0, 2] = a, -a
    if axis == 0:
        R[:, 1, 0], R[:, 1, 2] = 1.0, 1.0
        R[:, 2, 1] = 1.0
    else:
        R[:, 2, 0], R[:, 2, 2] = 1.0, 1.0
        R[:, 1, 1] = 1.0
    return R


class _Triplets:
    def __init__(self, nf):
        self.nf = nf
        self.rows, self.cols, self.vals = [], [], []

    def add(self, row_cells, col_cells, blocks):
        nf = self.nf
        fi = np.arange(nf)
        r = (row_cells[:, None, None] * nf + fi[None, :, None]) * np.ones((1, 1, nf), int)
        c = (col_cells[:, None, None] * nf + fi[None, None, :]) * np.ones((1, nf, 1), int)
        self.rows.append(r.ravel())
        self.cols.append(c.ravel())
        self.vals.append(np.asarray(blocks, dtype=float).ravel())

    def matrix(self, n):
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        vals = np.concatenate(self.vals)
        return sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


class SteadyLinearSystem:
    """Assembled discrete operator of the steady linearized system.

    Use :meth:`solve` for given sources, and :meth:`apply` to evaluate the
    discrete operator (divided by the cell measure) on a given field.
    Unknowns are ordered cell by cell with fields ``(h, u[, v])`` innermost;
    cells follow C order of the ``(nx,)`` or ``(nx, ny)`` field arrays.
    """

    def __init__(self, base: FlowState, grid: Grid, g: float,
                 harten_fraction: float = HARTEN_FRACTION, floor: float = DEFAULT_FLOOR):
        self.grid = grid
        self.g = g
        self.shape = grid.shape
        self.nf = 2 if grid.ndim == 1 else 3
        froude_denominator(base.h, base.speed() ** 2, g, floor)
        self.ncell = int(np.prod(self.shape))
        self.n = self.ncell * self.nf
        dirichlet = np.zeros(self.shape, dtype=bool)
        dirichlet[0] = True
        dirichlet[-1] = True
        self.dirichlet = dirichlet.ravel()
        if grid.ndim == 1:
            self.matrix = self._assemble_1d(base)
        else:
            self.harten_fraction = harten_fraction
            self.matrix = self._assemble_2d(base)

    # -- 1D ---------------------------------------------------------------
    def _assemble_1d(self, base):
        g = self.g
        h, u = base.h, base.u
        n = h.size
        hl, hr, ul, ur = h[:-1], h[1:], u[:-1], u[1:]
        hh = 0.5 * (hl + hr)
        uh = _roe_average(hl, hr, ul, ur)
        c = np.sqrt(g * hh)
        a = np.sqrt(hh / g)
        m = n - 1
        R = np.zeros((m, 2, 2))
        R[:, 0, 0], R[:, 0, 1], R[:, 1, 0], R[:, 1, 1] = a, -a, 1.0, 1.0
        Rinv = np.zeros((m, 2, 2))
        Rinv[:, 0, 0], Rinv[:, 0, 1] = 1.0 / (2 * a), 0.5
        Rinv[:, 1, 0], Rinv[:, 1, 1] = -1.0 / (2 * a), 0.5
        s = np.stack([uh + c, uh - c], axis=1)
        wp, wm = _split_weights(s)
        Pp, Pm = _project(R, Rinv, wp), _project(R, Rinv, wm)
        J = np.zeros((n, 2, 2))
        J[:, 0, 0], J[:, 0, 1], J[:, 1, 0], J[:, 1, 1] = u, h, g, u
        L = np.arange(n - 1)
        Rc = L + 1
        self.interface_speeds = s
        return self._finish(
            [(Rc, Rc, Pp @ J[Rc]), (Rc, L, -(Pp @ J[L])),
             (L, Rc, Pm @ J[Rc]), (L, L, -(Pm @ J[L]))], [])

    # -- 2D ---------------------------------------------------------------
    def _interface(self, hl, hr, ul, ur, vl, vr, axis):
        g = self.g
        hh = 0.5 * (hl + hr)
        normal = _roe_average(hl, hr, ul, ur) if axis == 0 else _roe_average(hl, hr, vl, vr)
        c = np.sqrt(g * hh)
        s = np.stack([normal + c, normal, normal - c], axis=1)
        R = _eigenvectors(hh, g, axis)
        return s, R, np.linalg.inv(R)

    def _assemble_2d(self, base):
        g = self.g
        nx, ny = self.shape
        dx, dy = self.grid.dx, self.grid.dy
        h, u, v = base.h, base.u, base.v
        idx = np.arange(nx * ny).reshape(nx, ny)
        faces = []
        # x-faces between (i-1, j) and (i, j)
        Lx, Rx = idx[:-1, :].ravel(), idx[1:, :].ravel()
        faces.append((Lx, Rx, 0, dy, None))
        # interior y-faces
        Ly, Ry = idx[:, :-1].ravel(), idx[:, 1:].ravel()
        faces.append((Ly, Ry, 1, dx, None))
        # reflective walls: ghost below row 0 and above row ny-1
        faces.append((idx[:, 0], idx[:, 0], 1, dx, "bottom"))
        faces.append((idx[:, -1], idx[:, -1], 1, dx, "top"))

        hf, uf, vf = h.ravel(), u.ravel(), v.ravel()
        prepared = []
        smax = 0.0
        for L, Rr, axis, weight, wall in faces:
            hl, hr = hf[L], hf[Rr]
            ul, ur = uf[L], uf[Rr]
            vl, vr = vf[L], vf[Rr]
            if wall == "bottom":
                vl = -vl
            elif wall == "top":
                vr = -vr
            s, R, Rinv = self._interface(hl, hr, ul, ur, vl, vr, axis)
            smax = max(smax, float(np.max(np.abs(s))) if s.size else 0.0)
            JL = _flux_jacobian(hl, ul, vl, g, axis)
            JR = _flux_jacobian(hr, ur, vr, g, axis)
            prepared.append((L, Rr, weight, wall, s, R, Rinv, JL, JR))
        delta = self.harten_fraction * smax
        self.harten_delta = delta
        mirror = np.diag([1.0, 1.0, -1.0])
        blocks = []
        for L, Rr, weight, wall, s, R, Rinv, JL, JR in prepared:
            wp, wm = _split_weights(s)
            Pp, Pm = _project(R, Rinv, wp), _project(R, Rinv, wm)
            if delta > 0.0:
                a = np.abs(s)
                rho = np.where(a <= delta, (s * s + delta * delta) / (2 * delta) - a, 0.0)
            else:
                rho = np.zeros_like(s)
            Mh = 0.5 * _project(R, Rinv, rho)
            if wall is None:
                blocks += [(Rr, Rr, weight * (Pp @ JR + Mh)), (Rr, L, -weight * (Pp @ JL + Mh)),
                           (L, Rr, weight * (Pm @ JR - Mh)), (L, L, -weight * (Pm @ JL - Mh))]
            elif wall == "bottom":
                # the ghost is the mirror image of the real cell on the right
                blocks.append((Rr, Rr, weight * ((Pp @ JR + Mh) - (Pp @ JL + Mh) @ mirror)))
            else:
                blocks.append((L, L, weight * ((Pm @ JR - Mh) @ mirror - (Pm @ JL - Mh))))
        # fixing term, cell local
        ux, uy = central_gradient(u, dx, 0), central_gradient(u, dy, 1)
        vx, vy = central_gradient(v, dx, 0), central_gradient(v, dy, 1)
        F = np.zeros((nx * ny, 3, 3))
        F[:, 1, 1], F[:, 1, 2] = vy.ravel(), -uy.ravel()
        F[:, 2, 1], F[:, 2, 2] = -vx.ravel(), ux.ravel()
        cells = idx.ravel()
        blocks.append((cells, cells, -dx * dy * F))
        return self._finish(blocks, [])

    def _finish(self, blocks, _):
        trip = _Triplets(self.nf)
        keep_row = ~self.dirichlet
        for rows, cols, blk in blocks:
            mask = keep_row[rows] & ~self.dirichlet[cols]
            if np.any(mask):
                trip.add(rows[mask], cols[mask], blk[mask])
        d = np.flatnonzero(self.dirichlet)
        trip.add(d, d, np.broadcast_to(np.eye(self.nf), (d.size, self.nf, self.nf)))
        return trip.matrix(self.n)

    # -- use ----------------------------------------------------------------
    @property
    def measure(self) -> float:
        return self.grid.cell_area

    def pack(self, *fields) -> np.ndarray:
        return np.stack([np.asarray(f, dtype=float).ravel() for f in fields], axis=1).ravel()

    def unpack(self, x: np.ndarray):
        cols = x.reshape(self.ncell, self.nf)
        return tuple(cols[:, k].reshape(self.shape).copy() for k in range(self.nf))

    def rhs(self, *sources) -> np.ndarray:
        b = self.measure * self.pack(*sources)
        b.reshape(self.ncell, self.nf)[self.dirichlet] = 0.0
        return b

    def apply(self, *fields) -> tuple[np.ndarray, ...]:
        """Discrete operator per unit cell measure (Dirichlet rows excluded -> 0)."""
        y = self.matrix @ self.pack(*fields)
        y.reshape(self.ncell, self.nf)[self.dirichlet] = 0.0
        return self.unpack(y / self.measure)

    def solve(self, *sources, params: SolverParams | None = None, x0=None):
        """Solve for the correction fields given per-cell sources ``(S_h, S_u[, S_v])``."""
        b = self.rhs(*sources)
        if not np.any(b):
            return tuple(np.zeros(self.shape) for _ in range(self.nf))
        result = bicgstab(self.matrix, b, x0=x0, params=params)
        self.last_result = result
        return self.unpack(result.x)


# -------------------------------------------------------------- 1D corrections

def tau_correction_1d(steady: FlowState, B_old, B_new, g: float,
                      floor: float = DEFAULT_FLOOR) -> CorrectionTau:
    """Linear response of the steady flow to a bed change ``B_new - B_old``."""
    h, u = steady.h, steady.u
    d = froude_denominator(h, u * u, g, floor)
    dB = np.asarray(B_new, dtype=float) - np.asarray(B_old, dtype=float)
    ph = g * h / d * dB
    pu = -g * u / d * dB
    return CorrectionTau(ph, pu, None, ph, pu, None)


def eps_correction_1d(steady: FlowState, B, law: SedimentLaw, grid: Grid, g: float,
                      params: SolverParams | None = None,
                      floor: float = DEFAULT_FLOOR) -> CorrectionEps:
    """``O(eps)`` flow correction caused by the migrating bed (1D)."""
    h, u = steady.h, steady.u
    B = np.asarray(B, dtype=float)
    d = froude_denominator(h, u * u, g, floor)
    lam0 = lambda0_1d(h, u, law, g, floor)
    Bx = np.zeros_like(B)
    Bx[1:-1] = (B[2:] - B[:-2]) / (2.0 * grid.dx)
    S_h = g * h * lam0 / d * Bx
    S_u = -u / h * S_h
    system = SteadyLinearSystem(steady, grid, g, floor=floor)
    ph, pu = system.solve(S_h, S_u, params=params)
    return CorrectionEps(ph, pu)


# -------------------------------------------------------------- 2D corrections

def solve_steady_linear_2d(steady: FlowState, grid: Grid, S_h, S_u, S_v, g: float,
                           params: SolverParams | None = None,
                           harten_fraction: float = HARTEN_FRACTION,
                           floor: float = DEFAULT_FLOOR):
    """Solve the steady linearized system on the base flow for given sources."""
    system = SteadyLinearSystem(steady, grid, g, harten_fraction, floor)
    return system.solve(S_h, S_u, S_v, params=params)


def tau_correction_2d(steady: FlowState, B_old, B_new, grid: Grid, g: float,
                      params: SolverParams | None = None, floor: float = DEFAULT_FLOOR,
                      system: SteadyLinearSystem | None = None) -> CorrectionTau:
    """Bar part in closed form plus the hat part from the linear solve."""
    h, u, v = steady.h, steady.u, steady.v
    d = froude_denominator(h, u * u + v * v, g, floor)
    dB = np.asarray(B_new, dtype=float) - np.asarray(B_old, dtype=float)
    bh = g * h / d * dB
    bu = -g * u / d * dB
    bv = -g * v / d * dB
    lu, lv = op_Lu(u, v, bu, bv, grid.dx, grid.dy)
    if not (np.any(lu) or np.any(lv)):
        zero = np.zeros_like(bh)
        hh, hu_, hv_ = zero, zero, zero
    else:
        system = system or SteadyLinearSystem(steady, grid, g, floor=floor)
        hh, hu_, hv_ = system.solve(np.zeros_like(bh), -lu, -lv, params=params)
    return CorrectionTau(bh + hh, bu + hu_, bv + hv_, bh, bu, bv)


def eps_correction_2d(steady: FlowState, B, law: SedimentLaw, grid: Grid, g: float,
                      params: SolverParams | None = None, floor: float = DEFAULT_FLOOR,
                      system: SteadyLinearSystem | None = None) -> CorrectionEps:
    """Hat system first, then the main ``O(eps)`` system (2D)."""
    h, u, v = steady.h, steady.u, steady.v
    B = np.asarray(B, dtype=float)
    d = froude_denominator(h, u * u + v * v, g, floor)
    sp0 = lambda_S_2d(0, h, u, v, law, g, grid, floor=floor, limited=False)
    Bx = central_gradient(B, grid.dx, 0)
    By = central_gradient(B, grid.dy, 1)
    rate = -(sp0.lx * Bx + sp0.ly * By) + sp0.S     # d B / d tau
    system = system or SteadyLinearSystem(steady, grid, g, floor=floor)
    # auxiliary hat fields
    wu = g * u / d * rate
    wv = g * v / d * rate
    lu, lv = op_Lu(u, v, wu, wv, grid.dx, grid.dy)
    zero = np.zeros_like(h)
    if np.any(lu) or np.any(lv):
        hh, hu_, hv_ = system.solve(zero, lu, lv, params=params)
    else:
        hh, hu_, hv_ = zero, zero.copy(), zero.copy()
    S_h = -g * h / d * rate - hh
    S_u = wu - hu_
    S_v = wv - hv_
    ph, pu, pv = system.solve(S_h, S_u, S_v, params=params)
    return CorrectionEps(ph, pu, pv, hh, hu_, hv_)
