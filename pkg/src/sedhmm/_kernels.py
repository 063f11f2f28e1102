"""Compiled inner loops for the finite-volume solvers and the SSOR sweeps.

Arrays passed here carry two ghost cells on every side.  Boundary kinds are
small integers so they can cross the numba boundary cheaply.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TRANSMISSIVE = 0
REFLECTIVE = 1
DISCHARGE = 2
PERIODIC = 3

# status codes returned by the loops
OK = 0
NOT_CONVERGED = 1
NEGATIVE_DEPTH = -1
NON_FINITE = -2
DEFECTIVE = -3


@njit(cache=True, inline="always", error_model="numpy")
def limiter(theta):
    if theta <= 0.0:
        return 0.0
    return theta if theta < 1.0 else 1.0


@njit(cache=True, inline="always", error_model="numpy")
def qb_tilde(kind, p, s):
    if kind == 0:
        if p == 3.0:
            return s * s
        return s ** (p - 1.0)
    d = s * s - p * p
    if d <= 0.0:
        return 0.0
    return d * math.sqrt(d) / s


@njit(cache=True, inline="always", error_model="numpy")
def lambda_b_tilde(kind, p, s):
    if kind == 0:
        if p == 3.0:
            return 3.0 * s * s
        return p * s ** (p - 1.0)
    d = s * s - p * p
    if d <= 0.0:
        return 0.0
    return 3.0 * s * math.sqrt(d)


# ---------------------------------------------------------------- 1D ghosts

@njit(cache=True, error_model="numpy")
def fill_ghosts_1d(h, hu, left, right, q_left, q_right):
    n = h.size - 4
    if left == PERIODIC or right == PERIODIC:
        h[0] = h[n]
        h[1] = h[n + 1]
        hu[0] = hu[n]
        hu[1] = hu[n + 1]
        h[n + 2] = h[2]
        h[n + 3] = h[3]
        hu[n + 2] = hu[2]
        hu[n + 3] = hu[3]
        return
    if left == REFLECTIVE:
        h[1] = h[2]
        h[0] = h[3]
        hu[1] = -hu[2]
        hu[0] = -hu[3]
    else:
        h[1] = h[2]
        h[0] = h[2]
        if left == DISCHARGE:
            hu[1] = q_left
            hu[0] = q_left
        else:
            hu[1] = hu[2]
            hu[0] = hu[2]
    if right == REFLECTIVE:
        h[n + 2] = h[n + 1]
        h[n + 3] = h[n]
        hu[n + 2] = -hu[n + 1]
        hu[n + 3] = -hu[n]
    else:
        h[n + 2] = h[n + 1]
        h[n + 3] = h[n + 1]
        if right == DISCHARGE:
            hu[n + 2] = q_right
            hu[n + 3] = q_right
        else:
            hu[n + 2] = hu[n + 1]
            hu[n + 3] = hu[n + 1]


@njit(cache=True, error_model="numpy")
def fill_scalar_ghosts_1d(b, periodic):
    n = b.size - 4
    if periodic:
        b[0] = b[n]
        b[1] = b[n + 1]
        b[n + 2] = b[2]
        b[n + 3] = b[3]
    else:
        b[0] = b[2]
        b[1] = b[2]
        b[n + 2] = b[n + 1]
        b[n + 3] = b[n + 1]


# ------------------------------------------------------- 1D fixed-bed f-wave

@njit(cache=True, error_model="numpy")
def waves_fixed_1d(h, hu, B, g, s, beta):
    """Wave speeds and strengths at interfaces k (between cells k-1 and k).

    Returns the largest speed over the physical interfaces, or -1 when a
    non-positive depth is met.
    """
    m = h.size
    n = m - 4
    smax = 0.0
    for k in range(1, m):
        hl = h[k - 1]
        hr = h[k]
        if not (hl > 0.0 and hr > 0.0):
            return -1.0
        ul = hu[k - 1] / hl
        ur = hu[k] / hr
        hbar = 0.5 * (hl + hr)
        sl = math.sqrt(hl)
        sr = math.sqrt(hr)
        uhat = (sl * ul + sr * ur) / (sl + sr)
        c = math.sqrt(g * hbar)
        d1 = hu[k] - hu[k - 1]
        d2 = hu[k] * ur - hu[k - 1] * ul + g * hbar * ((hr - hl) + (B[k] - B[k - 1]))
        s1 = uhat - c
        s2 = uhat + c
        s[0, k] = s1
        s[1, k] = s2
        beta[0, k] = (s2 * d1 - d2) / (2.0 * c)
        beta[1, k] = (d2 - s1 * d1) / (2.0 * c)
        if 2 <= k <= n + 2:
            a = max(abs(s1), abs(s2))
            if a > smax:
                smax = a
    return smax


@njit(cache=True, error_model="numpy")
def update_fixed_1d(h, hu, s, beta, dtdx, second, hn, hun, wh=1.0, wq=1.0):
    """Apply fluctuations and limited corrections; returns the weighted L1 change.

    Accumulation order matches :func:`update_coupled_1d` so that the coupled
    solver with a frozen bed reproduces this one bit for bit.
    """
    m = h.size
    n = m - 4
    dqh = np.zeros(m)
    dqm = np.zeros(m)
    for k in range(2, n + 3):
        r0 = 0.0
        r1 = 0.0
        l0 = 0.0
        l1 = 0.0
        for p in range(2):
            sp = s[p, k]
            bp = beta[p, k]
            z0 = bp
            z1 = bp * sp
            if sp > 0.0:
                r0 += z0
                r1 += z1
            elif sp < 0.0:
                l0 += z0
                l1 += z1
            else:
                r0 += 0.5 * z0
                r1 += 0.5 * z1
                l0 += 0.5 * z0
                l1 += 0.5 * z1
            if second:
                ku = k - 1 if sp > 0.0 else k + 1
                zz = z0 * z0 + z1 * z1
                if zz > 0.0:
                    bu = beta[p, ku]
                    theta = bu * (z0 + s[p, ku] * z1) / zz
                    phi = limiter(theta)
                    if phi > 0.0:
                        coef = 0.5 * math.copysign(1.0, sp) * (1.0 - dtdx * abs(sp)) * phi
                        r0 -= coef * z0
                        r1 -= coef * z1
                        l0 += coef * z0
                        l1 += coef * z1
        dqh[k] += r0
        dqm[k] += r1
        dqh[k - 1] += l0
        dqm[k - 1] += l1
    res = 0.0
    for j in range(2, n + 2):
        dh = -dtdx * dqh[j]
        dm = -dtdx * dqm[j]
        hn[j] = h[j] + dh
        hun[j] = hu[j] + dm
        res += wh * abs(dh) + wq * abs(dm)
    return res


@njit(cache=True, error_model="numpy")
def step_fixed_1d(h, hu, B, g, dtdx, left, right, q_left, q_right, second):
    """One update with a prescribed dt/dx; returns ``(status, max speed)``."""
    m = h.size
    n = m - 4
    s = np.zeros((2, m))
    beta = np.zeros((2, m))
    hn = h.copy()
    hun = hu.copy()
    fill_ghosts_1d(h, hu, left, right, q_left, q_right)
    smax = waves_fixed_1d(h, hu, B, g, s, beta)
    if smax < 0.0:
        return NEGATIVE_DEPTH, smax
    res = update_fixed_1d(h, hu, s, beta, dtdx, second, hn, hun)
    if not math.isfinite(res):
        return NON_FINITE, smax
    for j in range(2, n + 2):
        h[j] = hn[j]
        hu[j] = hun[j]
        if not h[j] > 0.0:
            return NEGATIVE_DEPTH, smax
    fill_ghosts_1d(h, hu, left, right, q_left, q_right)
    return OK, smax


@njit(cache=True, error_model="numpy")
def steady_fixed_1d(h, hu, B, g, cfl, tol, maxit, left, right, q_left, q_right, second,
                    wh=1.0, wq=1.0):
    """Pseudo-time march to a steady state on a frozen bed.

    ``B`` must already hold its ghost values.  Returns
    ``(status, iterations, residual)``.
    """
    m = h.size
    n = m - 4
    s = np.zeros((2, m))
    beta = np.zeros((2, m))
    hn = h.copy()
    hun = hu.copy()
    res = np.inf
    for it in range(1, maxit + 1):
        fill_ghosts_1d(h, hu, left, right, q_left, q_right)
        smax = waves_fixed_1d(h, hu, B, g, s, beta)
        if smax < 0.0:
            return NEGATIVE_DEPTH, it, res
        if smax == 0.0:
            return OK, it, 0.0
        dtdx = cfl / smax
        res = update_fixed_1d(h, hu, s, beta, dtdx, second, hn, hun, wh, wq)
        if not math.isfinite(res):
            return NON_FINITE, it, res
        for j in range(2, n + 2):
            h[j] = hn[j]
            hu[j] = hun[j]
            if not h[j] > 0.0:
                return NEGATIVE_DEPTH, it, res
        if res <= tol:
            fill_ghosts_1d(h, hu, left, right, q_left, q_right)
            return OK, it, res
    fill_ghosts_1d(h, hu, left, right, q_left, q_right)
    return NOT_CONVERGED, maxit, res


@njit(cache=True, error_model="numpy")
def march_fixed_1d(h, hu, B, g, dx, cfl, t_end, left, right, q_left, q_right, second):
    """Time-accurate fixed-bed march to ``t_end``; returns ``(status, steps)``."""
    m = h.size
    n = m - 4
    s = np.zeros((2, m))
    beta = np.zeros((2, m))
    hn = h.copy()
    hun = hu.copy()
    t = 0.0
    steps = 0
    while t < t_end:
        fill_ghosts_1d(h, hu, left, right, q_left, q_right)
        smax = waves_fixed_1d(h, hu, B, g, s, beta)
        if smax < 0.0:
            return NEGATIVE_DEPTH, steps
        dt = cfl * dx / smax if smax > 0.0 else t_end - t
        if t + dt >= t_end:
            dt = t_end - t
        res = update_fixed_1d(h, hu, s, beta, dt / dx, second, hn, hun)
        if not math.isfinite(res):
            return NON_FINITE, steps
        for j in range(2, n + 2):
            h[j] = hn[j]
            hu[j] = hun[j]
        t += dt
        steps += 1
    fill_ghosts_1d(h, hu, left, right, q_left, q_right)
    return OK, steps


# ------------------------------------------------------- 1D coupled 3-wave

@njit(cache=True, inline="always", error_model="numpy")
def _cubic_root(x, a2, a1, a0):
    # Newton on x^3 + a2 x^2 + a1 x + a0 from a nearby start; weak coupling
    # converges in two steps, strong coupling needs a few more
    for _ in range(50):
        p = ((x + a2) * x + a1) * x + a0
        dp = (3.0 * x + 2.0 * a2) * x + a1
        if dp == 0.0:
            break
        step = p / dp
        x -= step
        if abs(step) <= 1e-15 * (abs(x) + 1e-300):
            break
    return x


@njit(cache=True, error_model="numpy")
def waves_coupled_1d(h, hu, B, g, eps, kind, par, s, beta, e, work):
    """Three-wave decomposition of the coupled flow/bed system.

    ``e`` receives the bed component of each eigenvector (the others are
    ``1`` and the speed).  ``work`` is a (3, m) scratch array.  Returns the
    largest physical speed, ``-1`` for a non-positive depth, ``-3`` for a
    defective Roe matrix.
    """
    m = h.size
    n = m - 4
    for k in range(m):
        hk = h[k]
        if not hk > 0.0:
            return -1.0
        uk = hu[k] / hk
        work[0, k] = uk
        work[1, k] = math.sqrt(hk)
        work[2, k] = eps * uk * qb_tilde(kind, par, abs(uk))
    smax = 0.0
    for k in range(1, m):
        hl = h[k - 1]
        hr = h[k]
        ul = work[0, k - 1]
        ur = work[0, k]
        sl = work[1, k - 1]
        sr = work[1, k]
        hbar = 0.5 * (hl + hr)
        uhat = (sl * ul + sr * ur) / (sl + sr)
        c2 = g * hbar
        c = math.sqrt(c2)
        d1 = hu[k] - hu[k - 1]
        d2 = hu[k] * ur - hu[k - 1] * ul + g * hbar * ((hr - hl) + (B[k] - B[k - 1]))
        if eps == 0.0:
            # decoupled: reproduce the fixed-bed decomposition exactly
            s1 = uhat - c
            s2 = uhat + c
            s[0, k] = s1
            s[1, k] = s2
            s[2, k] = 0.0
            beta[0, k] = (s2 * d1 - d2) / (2.0 * c)
            beta[1, k] = (d2 - s1 * d1) / (2.0 * c)
            beta[2, k] = 0.0
            e[0, k] = 0.0
            e[1, k] = 0.0
            e[2, k] = (uhat * uhat - c2) / c2
            if 2 <= k <= n + 2:
                a = max(abs(s1), abs(s2))
                if a > smax:
                    smax = a
            continue
        lam = lambda_b_tilde(kind, par, abs(uhat))
        a31 = -eps * lam * uhat / hbar
        a32 = eps * lam / hbar
        # characteristic polynomial x^3 - 2u x^2 - (c2 - u^2 + c2 a32) x - c2 a31
        q2 = -2.0 * uhat
        q1 = -(c2 - uhat * uhat + c2 * a32)
        q0 = -c2 * a31
        s1 = _cubic_root(uhat - c, q2, q1, q0)
        s2 = _cubic_root(uhat + c, q2, q1, q0)
        s3 = -q0 / (s1 * s2)
        gap = min(abs(s1 - s2), min(abs(s1 - s3), abs(s2 - s3)))
        if not gap > 1e-10 * (abs(s1) + abs(s2)):
            return -3.0
        ic2 = 1.0 / c2
        e1 = ((s1 - uhat) ** 2 - c2) * ic2
        e2 = ((s2 - uhat) ** 2 - c2) * ic2
        e3 = ((s3 - uhat) ** 2 - c2) * ic2
        d3 = work[2, k] - work[2, k - 1]
        # Cramer's rule on R beta = d, R = [[1,1,1],[s1,s2,s3],[e1,e2,e3]]
        m00 = s2 * e3 - s3 * e2
        m01 = s1 * e3 - s3 * e1
        m02 = s1 * e2 - s2 * e1
        t1 = d2 * e3 - s3 * d3
        idet = 1.0 / (m00 - m01 + m02)
        b1 = (d1 * m00 - t1 + (d2 * e2 - s2 * d3)) * idet
        b2 = (t1 - d1 * m01 + (s1 * d3 - d2 * e1)) * idet
        b3 = d1 - b1 - b2
        s[0, k] = s1
        s[1, k] = s2
        s[2, k] = s3
        beta[0, k] = b1
        beta[1, k] = b2
        beta[2, k] = b3
        e[0, k] = e1
        e[1, k] = e2
        e[2, k] = e3
        if 2 <= k <= n + 2:
            a = max(abs(s1), max(abs(s2), abs(s3)))
            if a > smax:
                smax = a
    return smax


@njit(cache=True, error_model="numpy")
def update_coupled_1d(h, hu, B, s, beta, e, dtdx, second, dq):
    """In-place update of the physical cells; ``dq`` is a (3, m) scratch array."""
    m = h.size
    n = m - 4
    dq[:, :] = 0.0
    for k in range(2, n + 3):
        # interface k feeds cell k with (A+ - F) and cell k-1 with (A- + F)
        r0 = 0.0
        r1 = 0.0
        r2 = 0.0
        l0 = 0.0
        l1 = 0.0
        l2 = 0.0
        for p in range(3):
            sp = s[p, k]
            bp = beta[p, k]
            z0 = bp
            z1 = bp * sp
            z2 = bp * e[p, k]
            if sp > 0.0:
                r0 += z0
                r1 += z1
                r2 += z2
            elif sp < 0.0:
                l0 += z0
                l1 += z1
                l2 += z2
            else:
                r0 += 0.5 * z0
                r1 += 0.5 * z1
                r2 += 0.5 * z2
                l0 += 0.5 * z0
                l1 += 0.5 * z1
                l2 += 0.5 * z2
            if second:
                ku = k - 1 if sp > 0.0 else k + 1
                zz = z0 * z0 + z1 * z1 + z2 * z2
                if zz > 0.0:
                    bu = beta[p, ku]
                    theta = bu * (z0 + s[p, ku] * z1 + e[p, ku] * z2) / zz
                    phi = limiter(theta)
                    if phi > 0.0:
                        coef = 0.5 * math.copysign(1.0, sp) * (1.0 - dtdx * abs(sp)) * phi
                        r0 -= coef * z0
                        r1 -= coef * z1
                        r2 -= coef * z2
                        l0 += coef * z0
                        l1 += coef * z1
                        l2 += coef * z2
        dq[0, k] += r0
        dq[1, k] += r1
        dq[2, k] += r2
        dq[0, k - 1] += l0
        dq[1, k - 1] += l1
        dq[2, k - 1] += l2
    res = 0.0
    for j in range(2, n + 2):
        dh = -dtdx * dq[0, j]
        dm = -dtdx * dq[1, j]
        db = -dtdx * dq[2, j]
        h[j] += dh
        hu[j] += dm
        B[j] += db
        res += abs(dh) + abs(dm) + abs(db)
    return res


@njit(cache=True, error_model="numpy")
def march_coupled_1d(h, hu, B, g, eps, kind, par, dx, cfl, t_end,
                     left, right, q_left, q_right, second):
    """Time-accurate coupled march to ``t_end``; returns ``(status, steps)``."""
    m = h.size
    n = m - 4
    s = np.zeros((3, m))
    beta = np.zeros((3, m))
    e = np.zeros((3, m))
    dq = np.zeros((3, m))
    work = np.zeros((3, m))
    periodic = left == PERIODIC or right == PERIODIC
    t = 0.0
    steps = 0
    while t < t_end:
        fill_ghosts_1d(h, hu, left, right, q_left, q_right)
        fill_scalar_ghosts_1d(B, periodic)
        smax = waves_coupled_1d(h, hu, B, g, eps, kind, par, s, beta, e, work)
        if smax == -1.0:
            return NEGATIVE_DEPTH, steps
        if smax == -3.0:
            return DEFECTIVE, steps
        dt = cfl * dx / smax if smax > 0.0 else t_end - t
        if t + dt >= t_end:
            dt = t_end - t
        res = update_coupled_1d(h, hu, B, s, beta, e, dt / dx, second, dq)
        if not math.isfinite(res):
            return NON_FINITE, steps
        t += dt
        steps += 1
    fill_ghosts_1d(h, hu, left, right, q_left, q_right)
    fill_scalar_ghosts_1d(B, periodic)
    return OK, steps


# ----------------------------------------------------------- 2D fixed bed

@njit(cache=True, error_model="numpy")
def fill_ghosts_2d(h, hu, hv, xleft, xright, yleft, yright, q_left, q_right):
    """Ghosts in x over all rows, then in y over all columns (fills corners)."""
    nx = h.shape[0] - 4
    ny = h.shape[1] - 4
    for j in range(h.shape[1]):
        if xleft == PERIODIC or xright == PERIODIC:
            for gidx, src in ((0, nx), (1, nx + 1), (nx + 2, 2), (nx + 3, 3)):
                h[gidx, j] = h[src, j]
                hu[gidx, j] = hu[src, j]
                hv[gidx, j] = hv[src, j]
            continue
        for gidx, src in ((1, 2), (0, 3)):
            if xleft == REFLECTIVE:
                h[gidx, j] = h[src, j]
                hu[gidx, j] = -hu[src, j]
                hv[gidx, j] = hv[src, j]
            else:
                h[gidx, j] = h[2, j]
                hv[gidx, j] = 0.0 if xleft == DISCHARGE else hv[2, j]
                hu[gidx, j] = q_left if xleft == DISCHARGE else hu[2, j]
        for gidx, src in ((nx + 2, nx + 1), (nx + 3, nx)):
            if xright == REFLECTIVE:
                h[gidx, j] = h[src, j]
                hu[gidx, j] = -hu[src, j]
                hv[gidx, j] = hv[src, j]
            else:
                h[gidx, j] = h[nx + 1, j]
                hv[gidx, j] = 0.0 if xright == DISCHARGE else hv[nx + 1, j]
                hu[gidx, j] = q_right if xright == DISCHARGE else hu[nx + 1, j]
    for i in range(h.shape[0]):
        if yleft == PERIODIC or yright == PERIODIC:
            for gidx, src in ((0, ny), (1, ny + 1), (ny + 2, 2), (ny + 3, 3)):
                h[i, gidx] = h[i, src]
                hu[i, gidx] = hu[i, src]
                hv[i, gidx] = hv[i, src]
            continue
        for gidx, src in ((1, 2), (0, 3)):
            if yleft == REFLECTIVE:
                h[i, gidx] = h[i, src]
                hu[i, gidx] = hu[i, src]
                hv[i, gidx] = -hv[i, src]
            else:
                h[i, gidx] = h[i, 2]
                hu[i, gidx] = hu[i, 2]
                hv[i, gidx] = hv[i, 2]
        for gidx, src in ((ny + 2, ny + 1), (ny + 3, ny)):
            if yright == REFLECTIVE:
                h[i, gidx] = h[i, src]
                hu[i, gidx] = hu[i, src]
                hv[i, gidx] = -hv[i, src]
            else:
                h[i, gidx] = h[i, ny + 1]
                hu[i, gidx] = hu[i, ny + 1]
                hv[i, gidx] = hv[i, ny + 1]


@njit(cache=True, inline="always", error_model="numpy")
def _swe_waves(hl, hr, ml, mr, tl, tr, Bl, Br, g):
    """Normal-direction waves for (h, m, t): m normal and t tangential momentum.

    Returns speeds (s1, s2, s3) and strengths (b1, b2, b3) with eigenvectors
    (1, s1, that), (0, 0, 1), (1, s3, that) in (h, m, t) ordering.
    """
    ul = ml / hl
    ur = mr / hr
    vl = tl / hl
    vr = tr / hr
    hbar = 0.5 * (hl + hr)
    sl = math.sqrt(hl)
    sr = math.sqrt(hr)
    uhat = (sl * ul + sr * ur) / (sl + sr)
    vhat = (sl * vl + sr * vr) / (sl + sr)
    c = math.sqrt(g * hbar)
    d1 = mr - ml
    d2 = mr * ur - ml * ul + g * hbar * ((hr - hl) + (Br - Bl))
    d3 = mr * vr - ml * vl
    s1 = uhat - c
    s3 = uhat + c
    b1 = (s3 * d1 - d2) / (2.0 * c)
    b3 = (d2 - s1 * d1) / (2.0 * c)
    b2 = d3 - vhat * d1
    return s1, uhat, s3, b1, b2, b3, vhat


@njit(cache=True, error_model="numpy")
def _accumulate_dir(s, b, t, dtdx, second, ap, am, f):
    """Fluctuations and correction flux for the three waves at one interface.

    ``s``, ``b``, ``t`` hold speeds, strengths and tangential eigenvector
    entries for interfaces ``(lo, k, hi)`` in slots 0, 1, 2.
    """
    for p in range(3):
        sp = s[p, 1]
        bp = b[p, 1]
        if p == 1:
            z0 = 0.0
            z1 = 0.0
            z2 = bp
        else:
            z0 = bp
            z1 = bp * sp
            z2 = bp * t[1]
        if sp > 0.0:
            w = 1.0
        elif sp < 0.0:
            w = 0.0
        else:
            w = 0.5
        ap[0] += w * z0
        ap[1] += w * z1
        ap[2] += w * z2
        am[0] += (1.0 - w) * z0
        am[1] += (1.0 - w) * z1
        am[2] += (1.0 - w) * z2
        if second:
            u = 0 if sp > 0.0 else 2
            zz = z0 * z0 + z1 * z1 + z2 * z2
            if zz > 0.0:
                bu = b[p, u]
                if p == 1:
                    dot = bu * z2
                else:
                    dot = bu * (z0 + s[p, u] * z1 + t[u] * z2)
                phi = limiter(dot / zz)
                if phi > 0.0:
                    coef = 0.5 * math.copysign(1.0, sp) * (1.0 - dtdx * abs(sp)) * phi
                    f[0] += coef * z0
                    f[1] += coef * z1
                    f[2] += coef * z2


@njit(cache=True, error_model="numpy")
def sweep_2d(h, m, t, B, g, dtdx, second, hn, mn, tn, s, b, tw, sl, bl, tl, acc):
    """One directional update along the first axis, row by row.

    ``m`` is the momentum normal to the sweep and ``t`` the tangential one;
    sweeping along the second axis is done by passing transposed views.
    Rows outside the interior are skipped.  Returns the largest speed met
    on interior interfaces, or -1 for a non-positive depth.
    """
    mx, my = h.shape
    nx = mx - 4
    ny = my - 4
    smax = 0.0
    ap = acc[0]
    am = acc[1]
    fl = acc[2]
    for j in range(2, ny + 2):
        for i in range(1, mx):
            hl = h[i - 1, j]
            hr = h[i, j]
            if not (hl > 0.0 and hr > 0.0):
                return -1.0
            s1, s2, s3, b1, b2, b3, th = _swe_waves(
                hl, hr, m[i - 1, j], m[i, j], t[i - 1, j], t[i, j], B[i - 1, j], B[i, j], g)
            s[0, i] = s1
            s[1, i] = s2
            s[2, i] = s3
            b[0, i] = b1
            b[1, i] = b2
            b[2, i] = b3
            tw[i] = th
            if 2 <= i <= nx + 2:
                a = max(abs(s1), abs(s3))
                if a > smax:
                    smax = a
        for i in range(2, nx + 2):
            hn[i, j] = h[i, j]
            mn[i, j] = m[i, j]
            tn[i, j] = t[i, j]
        for i in range(2, nx + 3):
            for q in range(3):
                ii = i - 1 + q
                for p in range(3):
                    sl[p, q] = s[p, ii]
                    bl[p, q] = b[p, ii]
                tl[q] = tw[ii]
            for c in range(3):
                ap[c] = 0.0
                am[c] = 0.0
                fl[c] = 0.0
            _accumulate_dir(sl, bl, tl, dtdx, second, ap, am, fl)
            # interface i: right-going part to cell i, left-going part to cell i-1
            if i <= nx + 1:
                hn[i, j] -= dtdx * (ap[0] - fl[0])
                mn[i, j] -= dtdx * (ap[1] - fl[1])
                tn[i, j] -= dtdx * (ap[2] - fl[2])
            if i >= 3:
                hn[i - 1, j] -= dtdx * (am[0] + fl[0])
                mn[i - 1, j] -= dtdx * (am[1] + fl[1])
                tn[i - 1, j] -= dtdx * (am[2] + fl[2])
    return smax


@njit(cache=True, error_model="numpy")
def max_speeds_2d(h, hu, hv, g):
    """Largest ``|u| + c`` and ``|v| + c`` over interior cells; -1 on bad depth."""
    mx, my = h.shape
    smx = 0.0
    smy = 0.0
    for i in range(2, mx - 2):
        for j in range(2, my - 2):
            hh = h[i, j]
            if not hh > 0.0:
                return -1.0, -1.0
            c = math.sqrt(g * hh)
            a = abs(hu[i, j] / hh) + c
            if a > smx:
                smx = a
            a = abs(hv[i, j] / hh) + c
            if a > smy:
                smy = a
    return smx, smy


@njit(cache=True, error_model="numpy")
def _strang_2d(h, hu, hv, B, g, dt, dx, dy, xleft, xright, yleft, yright, q_left, q_right,
               second, work, wh, wq):
    """Strang-split update x(dt/2) y(dt) x(dt/2); returns ``(status, weighted change)``."""
    h0 = work[0]
    u0 = work[1]
    v0 = work[2]
    hn = work[3]
    hun = work[4]
    hvn = work[5]
    mx, my = h.shape
    n = max(mx, my)
    s = np.empty((3, n))
    b = np.empty((3, n))
    tw = np.empty(n)
    sl = np.empty((3, 3))
    bl = np.empty((3, 3))
    tl = np.empty(3)
    acc = np.empty((3, 3))
    for i in range(mx):
        for j in range(my):
            h0[i, j] = h[i, j]
            u0[i, j] = hu[i, j]
            v0[i, j] = hv[i, j]
    for stage in range(3):
        fill_ghosts_2d(h, hu, hv, xleft, xright, yleft, yright, q_left, q_right)
        if stage == 1:
            sm = sweep_2d(h.T, hv.T, hu.T, B.T, g, dt / dy, second, hn.T, hvn.T, hun.T,
                          s, b, tw, sl, bl, tl, acc)
        else:
            sm = sweep_2d(h, hu, hv, B, g, 0.5 * dt / dx, second, hn, hun, hvn,
                          s, b, tw, sl, bl, tl, acc)
        if sm < 0.0:
            return NEGATIVE_DEPTH, 0.0
        for i in range(2, mx - 2):
            for j in range(2, my - 2):
                if not hn[i, j] > 0.0:
                    return NEGATIVE_DEPTH, 0.0
                h[i, j] = hn[i, j]
                hu[i, j] = hun[i, j]
                hv[i, j] = hvn[i, j]
    res = 0.0
    for i in range(2, mx - 2):
        for j in range(2, my - 2):
            res += wh * abs(h[i, j] - h0[i, j]) \
                + wq * (abs(hu[i, j] - u0[i, j]) + abs(hv[i, j] - v0[i, j]))
    if not math.isfinite(res):
        return NON_FINITE, res
    fill_ghosts_2d(h, hu, hv, xleft, xright, yleft, yright, q_left, q_right)
    return OK, res


@njit(cache=True, error_model="numpy")
def step_fixed_2d(h, hu, hv, B, g, dt, dx, dy, xleft, xright, yleft, yright,
                  q_left, q_right, second):
    """One split update with prescribed dt; returns ``(status, smx, smy)``.

    The speeds are the cell-wise ``|u| + c`` and ``|v| + c`` maxima of the
    state before the update.
    """
    fill_ghosts_2d(h, hu, hv, xleft, xright, yleft, yright, q_left, q_right)
    smx, smy = max_speeds_2d(h, hu, hv, g)
    if smx < 0.0:
        return NEGATIVE_DEPTH, smx, smy
    work = np.empty((6,) + h.shape)
    status, res = _strang_2d(h, hu, hv, B, g, dt, dx, dy, xleft, xright, yleft, yright,
                             q_left, q_right, second, work, 1.0, 1.0)
    return status, smx, smy


@njit(cache=True, error_model="numpy")
def steady_fixed_2d(h, hu, hv, B, g, dx, dy, cfl, tol, maxit,
                    xleft, xright, yleft, yright, q_left, q_right, second, wh=1.0, wq=1.0):
    """Pseudo-time march of the split scheme; returns ``(status, iterations, residual)``."""
    work = np.empty((6,) + h.shape)
    res = np.inf
    for it in range(1, maxit + 1):
        fill_ghosts_2d(h, hu, hv, xleft, xright, yleft, yright, q_left, q_right)
        smx, smy = max_speeds_2d(h, hu, hv, g)
        if smx < 0.0:
            return NEGATIVE_DEPTH, it, res
        rate = max(smx / dx, smy / dy)
        if rate == 0.0:
            return OK, it, 0.0
        status, res = _strang_2d(h, hu, hv, B, g, cfl / rate, dx, dy, xleft, xright,
                                 yleft, yright, q_left, q_right, second, work, wh, wq)
        if status != OK:
            return status, it, res
        if res <= tol:
            return OK, it, res
    fill_ghosts_2d(h, hu, hv, xleft, xright, yleft, yright, q_left, q_right)
    return NOT_CONVERGED, maxit, res


# ---------------------------------------------------------------- SSOR

@njit(cache=True, error_model="numpy")
def ssor_apply(indptr, indices, data, diag, omega, r, z):
    """z = M^{-1} r for the SSOR splitting of a CSR matrix."""
    n = r.size
    y = np.empty(n)
    scale = omega * (2.0 - omega)
    for i in range(n):
        acc = scale * r[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j < i:
                acc -= omega * data[k] * y[j]
        y[i] = acc / diag[i]
    for i in range(n - 1, -1, -1):
        acc = diag[i] * y[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j > i:
                acc -= omega * data[k] * z[j]
        z[i] = acc / diag[i]
