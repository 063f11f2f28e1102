"""One test per acceptance criterion, each at its stated tolerance.

Every test prints a single PASS/FAIL line (also collected in the terminal
summary) before asserting.  Criteria 3, 4 and 5 take minutes; the
fine-mesh coupled reference of criterion 3 is cached on disk after the
first run.
"""

from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg

from sedhmm.bed import op_LS
from sedhmm.bench import convergence_study, run_multiscale, spread_angle, timing_study
from sedhmm.config import preset
from sedhmm.correction import (SteadyLinearSystem, eps_correction_1d, eps_correction_2d, op_Lf,
                               op_Lu)
from sedhmm.driver import MacroConfig, SimConfig, run
from sedhmm.grid import FlowState, Grid
from sedhmm.hydro import Boundary
from sedhmm.linalg import SolverParams, bicgstab
from sedhmm.linear import default_spec, order_study
from sedhmm.scaling import Scales
from sedhmm.sediment import Grass

EPS_SWEEP = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
DEVRIEND = np.degrees(np.arctan(3 * np.sqrt(3) * 2 / 26))   # m = 3


# ------------------------------------------------------------------------- 1

def lake_drift(grid, steps=1000):
    if grid.ndim == 1:
        B = 0.5 * np.exp(-((grid.x - 500.0) / 80.0) ** 2)
        state = FlowState(10.0 - B, np.zeros_like(B))
    else:
        X, Y = grid.mesh()
        B = 0.5 * np.exp(-((X - 500.0) ** 2 + (Y - 480.0) ** 2) / 80.0**2)
        state = FlowState(10.0 - B, np.zeros_like(B), np.zeros_like(B))
    cfg = SimConfig(grid=grid, law=Grass(), t_end=steps * 100.0, scheme="second",
                    boundary=Boundary(discharge=0.0), macro=MacroConfig(K=2, max_dt=100.0),
                    scales=Scales(1000.0, 10.0, 1.0))
    rec = run(cfg, B, state)
    assert rec.macro_steps == steps
    drift = max(np.max(np.abs(rec.bed - B)), np.max(np.abs(rec.state.h + rec.bed - 10.0)),
                np.max(np.abs(rec.state.hu)))
    if grid.ndim == 2:
        drift = max(drift, np.max(np.abs(rec.state.hv)))
    return float(drift)


def test_criterion_1_lake_at_rest(verdict):
    d1 = lake_drift(Grid.line(64, 1000.0))
    d2 = lake_drift(Grid.plane(12, 12, 1000.0, 1000.0))
    ok = max(d1, d2) <= 1e-10
    verdict(1, ok, f"lake at rest over 1000 macro steps, drift 1D {d1:.2e}, 2D {d2:.2e} "
                   f"(<= 1e-10)")
    assert ok


# ------------------------------------------------------------------------- 2

def test_criterion_2_linear_orders(verdict):
    st = order_study(default_spec(), eps_list=EPS_SWEEP)
    ok = 0.85 <= st.slope0 <= 1.15 and 1.8 <= st.slope1 <= 2.2
    verdict(2, ok, f"zeroth-order slope {st.slope0:.4f} in [0.85, 1.15], "
                   f"first-order slope {st.slope1:.4f} in [1.8, 2.2]")
    assert ok


# ------------------------------------------------------------------------- 3

@pytest.mark.slow
def test_criterion_3_convergence_orders(verdict):
    cfg = preset("convergence1d")
    assert (cfg.T, cfg.K, cfg.law, cfg.m, cfg.A_g) == (90000.0, 1, "grass", 3.0, 0.001)
    rep = convergence_study(cfg, ns=(128, 256, 512, 1024), n_ref=8192)
    p1 = rep.fitted("first", 128, 1024)
    p2 = rep.fitted("second", 128, 512)
    ratio = rep.error("second", 256) / rep.error("first", 256)
    tail = rep.order("second-no-eps", 1024)
    ok = 0.8 <= p1 <= 1.1 and p2 >= 1.5 and ratio <= 0.5 and tail < 1.0
    _, e1 = rep.errors("first")
    _, e2 = rep.errors("second")
    _, e3 = rep.errors("second-no-eps")
    verdict(3, ok, f"first order {p1:.3f} in [0.8, 1.1]; second order {p2:.3f} >= 1.5; "
                   f"e2/e1 at N=256 {ratio:.3f} <= 0.5; no-eps order at N=1024 {tail:.3f} < 1 "
                   f"(L1 errors first {np.array2string(e1, precision=3)}, "
                   f"second {np.array2string(e2, precision=3)}, "
                   f"no-eps {np.array2string(e3, precision=3)})")
    assert ok


# ------------------------------------------------------------------------- 4

@pytest.mark.slow
def test_criterion_4_speedup(verdict):
    rows = timing_study(preset("timing1d"), a_values=(0.001,), ns=(256,),
                        methods=("coupled", "second"))
    t = {r.method: r.seconds for r in rows}
    ratio = t["coupled"] / t["second"]
    ok = ratio >= 20.0
    verdict(4, ok, f"coupled {t['coupled']:.2f} s vs second-order {t['second']:.3f} s, "
                   f"speedup {ratio:.1f}x (>= 20x)")
    assert ok


# ------------------------------------------------------------------------- 5

@pytest.mark.slow
def test_criterion_5_star_pattern_angle(verdict):
    cfg = replace(preset("dune2d"), n=64, ny=64, T=1.8e5)
    rec = run_multiscale(cfg)
    bed = rec.bed - rec.bed.min()
    up = spread_angle(bed, rec.grid, x_start=500.0, lobe="upper")
    lo = spread_angle(bed, rec.grid, x_start=500.0, lobe="lower")
    ok = abs(up - DEVRIEND) <= 3.0 and abs(lo - DEVRIEND) <= 3.0
    verdict(5, ok, f"spread angle upper {up:.2f} deg, lower {lo:.2f} deg vs "
                   f"{DEVRIEND:.2f} +- 3 deg (64x64, T = 1.8e5 s)")
    assert ok


# ------------------------------------------------------------------------- 6

def _manufactured_ok(grid, base):
    system = SteadyLinearSystem(base, grid, 98.1)
    if grid.ndim == 1:
        x = grid.x
        exact = [np.sin(np.pi * x) ** 2 * np.cos(3 * x), 0.1 * np.sin(2 * np.pi * x)]
    else:
        X, Y = grid.mesh()
        exact = [np.sin(np.pi * X) ** 2 * np.cos(np.pi * Y), 0.1 * np.sin(2 * np.pi * X) * Y,
                 0.2 * np.sin(np.pi * X) * np.cos(np.pi * Y)]
    for f in exact:
        f[0] = f[-1] = 0.0
    sources = system.apply(*exact)
    got = system.solve(*sources, params=SolverParams(tol=1e-6))
    b = system.rhs(*sources)
    x, xs = system.pack(*got), system.pack(*exact)
    res = np.linalg.norm(b - system.matrix @ x) / np.linalg.norm(b)
    kappa = np.linalg.cond(system.matrix.toarray())
    err = np.linalg.norm(x - xs) / np.linalg.norm(xs)
    return res <= 1e-6 and err <= kappa * res, res, err


def test_criterion_6_correction_oracles(verdict):
    g1 = Grid.line(200)
    h = 1.0 - 0.05 * np.sin(np.pi * g1.x) ** 2
    ok1, r1, e1 = _manufactured_ok(g1, FlowState(h, np.ones_like(h)))
    g2 = Grid.plane(20, 16)
    X, Y = g2.mesh()
    h2 = 1.0 - 0.05 * np.sin(np.pi * X) ** 2 * np.cos(np.pi * Y) ** 2
    base2 = FlowState(h2, np.ones_like(h2), 0.05 * h2 * np.sin(np.pi * X) * np.sin(2 * np.pi * Y))
    ok2, r2, e2 = _manufactured_ok(g2, base2)

    ge = Grid.plane(17, 9, 1.0, 0.5)
    Xe, _ = ge.mesh()
    u = 1.0 + 0.3 * np.sin(2 * np.pi * Xe) + Xe**2
    z = np.zeros_like(u)
    phu = np.cos(3 * Xe)
    vanish = (np.all(op_LS(u, z, ge.dx, ge.dy) == 0.0)
              and all(np.all(c == 0.0) for c in op_Lu(u, z, phu, z, ge.dx, ge.dy))
              and all(np.all(c == 0.0) for c in op_Lf(u, z, phu, z, ge.dx, ge.dy)))

    n, ny = 120, 5
    s1, s2 = Grid.line(n), Grid.plane(n, ny, 1.0, 0.3)
    xs = s1.x
    B = 0.1 * np.where((xs > 0.3) & (xs < 0.5), np.sin((xs - 0.3) * np.pi / 0.2) ** 2, 0.0)
    law = Grass(A_g=0.001, gamma=0.4)
    params = SolverParams(tol=1e-13)
    c1 = eps_correction_1d(FlowState(1.0 - B, np.ones(n)), B, law, s1, 98.1, params)
    B2 = np.repeat(B[:, None], ny, 1)
    c2 = eps_correction_2d(FlowState(1.0 - B2, np.ones((n, ny)), np.zeros((n, ny))), B2, law,
                           s2, 98.1, params)
    strip = max(np.max(np.abs(c2.h - c1.h[:, None])), np.max(np.abs(c2.u - c1.u[:, None])),
                np.max(np.abs(c2.v)))
    ok = ok1 and ok2 and vanish and strip <= 1e-10
    verdict(6, ok, f"manufactured residual 1D {r1:.1e} / 2D {r2:.1e} (<= 1e-6, error "
                   f"{e1:.1e} / {e2:.1e} within cond bound); operators vanish on 1D fields: "
                   f"{vanish}; strip mismatch {strip:.1e} (<= 1e-10)")
    assert ok


# ------------------------------------------------------------------------- 7

def test_criterion_7_bicgstab(verdict):
    import scipy.sparse as sp
    worst, worst_res = 0.0, 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        A = sp.random(50, 50, density=0.15, random_state=rng, format="csr")
        rowsum = np.asarray(abs(A).sum(axis=1)).ravel()
        A = sp.csr_matrix(A + sp.diags(rowsum + 1.0 + rng.random(50)))
        b = rng.standard_normal(50)
        dense = A.toarray()
        ref = scipy.linalg.lu_solve(scipy.linalg.lu_factor(dense), b)
        res = bicgstab(A, b, params=SolverParams(tol=1e-12, precondition=seed % 2 == 0))
        worst = max(worst, np.linalg.norm(res.x - ref) / np.linalg.norm(ref))
        tight = np.linalg.norm(b - dense @ res.x) / np.linalg.norm(b)
        assert tight <= 1e-12
        # at tol 1e-12 both residuals sit at rounding level, so the reported
        # value is checked on a solve where it carries information
        loose = bicgstab(A, b, params=SolverParams(tol=1e-6, precondition=seed % 2 == 0))
        true_res = np.linalg.norm(b - dense @ loose.x) / np.linalg.norm(b)
        worst_res = max(worst_res, abs(loose.residual - true_res) / true_res)
    ok = worst <= 1e-8 and worst_res <= 1e-8
    verdict(7, ok, f"worst relative error vs dense LU {worst:.1e} (<= 1e-8) over 20 systems; "
                   f"reported residual matches recomputation to {worst_res:.1e}")
    assert ok


# ------------------------------------------------------------------------- 8

def test_criterion_8_perturbation_identities(verdict):
    st = order_study(default_spec(), eps_list=EPS_SWEEP)
    bound = np.all(st.relation_residual <= 10 * st.eps**2)
    ok = bool(bound) and 1.8 <= st.speed_slope <= 2.2
    worst = float(np.max(st.relation_residual / st.eps**2))
    verdict(8, ok, f"eigen-relation residual <= {worst:.3f} eps^2 (<= 10 eps^2); "
                   f"slow-eigenvalue slope {st.speed_slope:.4f} in [1.8, 2.2]")
    assert ok
