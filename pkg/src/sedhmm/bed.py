"""Homogenized bed speeds and the MUSCL/upwind/RK2 bed update.

The bed obeys ``B_tau + lambda . grad B = S`` in rescaled time
``tau = eps t``, where ``lambda`` and ``S`` are closed-form functions of the
steady flow (zeroth order) plus ``O(eps)`` corrections (first order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .hydro import SolverError
from .sediment import SedimentLaw

DEFAULT_FLOOR = 1e-8


class TranscriticalError(SolverError):
    """``|u|^2 - g h`` came within the floor of zero somewhere."""


def froude_denominator(h, speed2, g: float, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """``|u|^2 - g h`` per cell, rejecting near-critical cells."""
    d = np.asarray(speed2, dtype=float) - g * np.asarray(h, dtype=float)
    bad = np.abs(d) < floor
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise TranscriticalError(f"|u|^2 - g h = {d[tuple(idx)]:.3e} at cell {tuple(idx)} "
                                 f"is below the floor {floor:g}")
    return d


def lambda0_1d(h, u, law: SedimentLaw, g: float, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Zeroth-order bed speed ``-g u lb(|u|) / (u^2 - g h)``."""
    u = np.asarray(u, dtype=float)
    d = froude_denominator(h, u * u, g, floor)
    return -g * u * law.lambda_b_tilde(np.abs(u)) / d


def lambda1_1d(h, u, law: SedimentLaw, g: float, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """First-order bed speed; ``h`` and ``u`` are the eps-corrected fast variables."""
    h = np.asarray(h, dtype=float)
    u = np.asarray(u, dtype=float)
    d = froude_denominator(h, u * u, g, floor)
    lb = law.lambda_b_tilde(np.abs(u))
    lam0 = -g * u * lb / d
    return lam0 * (1.0 - law.epsilon * g * (u * u + g * h) * lb / (d * d))


@dataclass
class BedSpeeds:
    """Per-cell bed speeds (``ly`` is None in 1D) and source ``S``."""

    lx: np.ndarray
    ly: np.ndarray | None = None
    S: np.ndarray | None = None

    @classmethod
    def zeros(cls, shape) -> "BedSpeeds":
        if len(shape) == 1:
            return cls(np.zeros(shape), None, np.zeros(shape))
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))


# ----------------------------------------------------------------- gradients

def central_gradient(f: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    """Central differences inside, one-sided first-order differences at the ends."""
    return np.gradient(f, spacing, axis=axis, edge_order=1)


def minmod(a, b):
    """``minmod(a, b)``; zero when signs differ, equal to ``phi(a/b) * b``."""
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def limited_gradient(f: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    """Minmod-limited slope of one-sided differences (one-sided at the ends)."""
    f = np.asarray(f, dtype=float)
    d = np.diff(f, axis=axis) / spacing
    n = f.shape[axis]
    lo = np.take(d, range(0, n - 2), axis=axis)
    hi = np.take(d, range(1, n - 1), axis=axis)
    inner = minmod(lo, hi)
    first = np.take(d, [0], axis=axis)
    last = np.take(d, [n - 2], axis=axis)
    return np.concatenate([first, inner, last], axis=axis)


def op_LS(u, v, dx: float, dy: float, limited: bool = False) -> np.ndarray:
    """``u.(u.grad u) - |u|^2 div u`` written as ``uv(u_y+v_x) - u^2 v_y - v^2 u_x``.

    In this form the operator vanishes identically (not just to truncation
    error) whenever ``v == 0``.
    """
    grad = limited_gradient if limited else central_gradient
    ux, uy = grad(u, dx, 0), grad(u, dy, 1)
    vx, vy = grad(v, dx, 0), grad(v, dy, 1)
    return u * v * (uy + vx) - u * u * vy - v * v * ux


# ------------------------------------------------------------- 2D speeds

def lambda_S_2d(order: int, h, u, v, law: SedimentLaw, g: float, grid: Grid,
                hat_h=None, hat_u=None, hat_v=None, floor: float = DEFAULT_FLOOR,
                limited: bool = True) -> BedSpeeds:
    """Bed speed vector and source in 2D.

    ``order=1`` applies the first-order factor and, when the auxiliary fields
    ``hat_*`` are given, their source contribution.  Inputs are the
    eps-corrected fast variables for order 1.
    """
    h = np.asarray(h, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s2 = u * u + v * v
    speed = np.sqrt(s2)
    d = froude_denominator(h, s2, g, floor)
    lb = law.lambda_b_tilde(speed)
    lx = -g * lb * u / d
    ly = -g * lb * v / d
    ls = op_LS(u, v, grid.dx, grid.dy, limited=limited)
    S = (law.qb_tilde(speed) + g * h * law.qb_tilde_prime_over_speed(speed)) / d * ls
    if order == 0:
        return BedSpeeds(lx, ly, S)
    if order != 1:
        raise ValueError("order must be 0 or 1")
    eps = law.epsilon
    F1 = g * (s2 + g * h) * lb / (d * d)
    S1 = S - eps * S * F1
    if hat_h is not None:
        S1 = S1 - eps * (h * hat_h - u * hat_u - v * hat_v) * lb / d
    return BedSpeeds(lx * (1.0 - eps * F1), ly * (1.0 - eps * F1), S1)


# ------------------------------------------------------------ reconstruction

def limiter(r):
    """Minmod limiter ``max(0, min(1, r))``."""
    return np.maximum(0.0, np.minimum(1.0, r))


def _extend(B: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    mode = "wrap" if periodic else "edge"
    widths = [(0, 0)] * B.ndim
    widths[axis] = (2, 2)
    return np.pad(B, widths, mode=mode)


def muscl_faces(B: np.ndarray, axis: int = 0, periodic: bool = False):
    """Left and right states at every face along ``axis``.

    Returns ``(BL, BR)`` with ``n + 1`` entries along ``axis``; face ``k``
    sits between cells ``k - 1`` and ``k``.  Boundary cells see two ghost
    layers (edge copies, or wrap-around when ``periodic``).
    """
    B = np.asarray(B, dtype=float)
    Be = _extend(B, axis, periodic)
    d = np.diff(Be, axis=axis)               # n + 3 differences
    m = Be.shape[axis]
    dm = np.take(d, range(0, m - 2), axis=axis)    # backward diffs, cells 1..m-2
    dp = np.take(d, range(1, m - 1), axis=axis)    # forward diffs
    slope = minmod(dm, dp)                   # cells 1..m-2 of the extension
    core = np.take(Be, range(1, m - 1), axis=axis)
    left = core + 0.5 * slope                # value at a cell's right face
    right = core - 0.5 * slope               # value at a cell's left face
    n = B.shape[axis]
    BL = np.take(left, range(0, n + 1), axis=axis)
    BR = np.take(right, range(1, n + 2), axis=axis)
    return BL, BR


def _upwind_derivative(B, lam, axis, spacing, periodic):
    BL, BR = muscl_faces(B, axis, periodic)
    n = B.shape[axis]
    lo = slice(0, n)
    hi = slice(1, n + 1)

    def sl(a, s):
        idx = [slice(None)] * a.ndim
        idx[axis] = s
        return a[tuple(idx)]

    plus = sl(BL, hi) - sl(BL, lo)
    minus = sl(BR, hi) - sl(BR, lo)
    return np.where(lam > 0.0, plus, minus) / spacing


def bed_operator(B: np.ndarray, speeds: BedSpeeds, grid: Grid, periodic: bool = False):
    """Semi-discrete right-hand side ``-lambda . grad B + S``."""
    out = -speeds.lx * _upwind_derivative(B, speeds.lx, 0, grid.dx, periodic)
    if B.ndim == 2 and speeds.ly is not None:
        out = out - speeds.ly * _upwind_derivative(B, speeds.ly, 1, grid.dy, periodic)
    if speeds.S is not None:
        out = out + speeds.S
    return out


def euler_bed_step(B, speeds: BedSpeeds, dtau: float, grid: Grid, periodic: bool = False):
    """First stage: ``B + dtau * (-lambda . grad B + S)``."""
    return B + dtau * bed_operator(B, speeds, grid, periodic)


def rk2_bed_step(B, speeds_n: BedSpeeds, speeds_np1: BedSpeeds, dtau: float, grid: Grid,
                 periodic: bool = False, B_tilde=None):
    """Two-stage TVD Runge-Kutta step; stage 1 may be supplied as ``B_tilde``."""
    if B_tilde is None:
        B_tilde = euler_bed_step(B, speeds_n, dtau, grid, periodic)
    return 0.5 * (B + B_tilde) + 0.5 * dtau * bed_operator(B_tilde, speeds_np1, grid, periodic)


def cfl_dtau(speeds: BedSpeeds, grid: Grid, cfl: float, cap: float = np.inf) -> float:
    """``cfl / max(|lx|/dx + |ly|/dy)``, or ``cap`` when every speed is zero."""
    rate = np.abs(speeds.lx) / grid.dx
    if speeds.ly is not None:
        rate = rate + np.abs(speeds.ly) / grid.dy
    top = float(np.max(rate))
    if top == 0.0:
        return cap
    return min(cfl / top, cap)
