import numpy as np
import pytest
from scipy.optimize import brentq

from sedhmm import _kernels as K
from sedhmm.grid import FlowState, Grid
from sedhmm.hydro import (Boundary, SolverError, SteadyConfig, coupled_roe_run_1d,
                          march_fixed_bed_1d, roe_step_fixed_bed, solve_steady)
from sedhmm.scenarios import dune_bed_1d
from sedhmm.sediment import Grass

G = 9.81
WALLS = Boundary(left="reflective", right="reflective", discharge=0.0)
PERIODIC = Boundary(left="periodic", right="periodic", discharge=0.0)


def bump_1d(grid, height=0.5):
    return height * np.exp(-((grid.x - 0.5 * grid.lx) / (0.08 * grid.lx)) ** 2)


def bump_2d(grid, height=0.5):
    X, Y = grid.mesh()
    r2 = (X - 0.5 * grid.lx) ** 2 + (Y - 0.45 * grid.ly) ** 2
    return height * np.exp(-r2 / (0.08 * grid.lx) ** 2)


@pytest.mark.parametrize("second_order", [False, True])
def test_lake_at_rest_1d(second_order):
    grid = Grid.line(80, 1000.0)
    B = bump_1d(grid)
    state = FlowState(10.0 - B, np.zeros(grid.nx))
    for _ in range(200):
        state = roe_step_fixed_bed(state, B, grid, 1.0, G, WALLS, second_order)
    assert np.max(np.abs(state.h + B - 10.0)) < 1e-12
    assert np.max(np.abs(state.hu)) < 1e-12


@pytest.mark.parametrize("second_order", [False, True])
def test_lake_at_rest_2d(second_order):
    grid = Grid.plane(20, 16, 1000.0, 800.0)
    B = bump_2d(grid)
    z = np.zeros(grid.shape)
    state = FlowState(10.0 - B, z, z.copy())
    for _ in range(100):
        state = roe_step_fixed_bed(state, B, grid, 3.0, G, WALLS, second_order)
    assert np.max(np.abs(state.h + B - 10.0)) < 1e-12
    assert np.max(np.abs(state.hu)) < 1e-12
    assert np.max(np.abs(state.hv)) < 1e-12


def test_uniform_flow_is_stationary():
    grid = Grid.line(50, 1000.0)
    B = np.zeros(grid.nx)
    state = FlowState(np.full(grid.nx, 10.0), np.full(grid.nx, 10.0))
    res = solve_steady(B, grid, SteadyConfig(tol=1e-12, boundary=Boundary(discharge=10.0)), state)
    assert res.converged and res.iterations <= 2
    assert np.allclose(res.state.h, 10.0, rtol=0, atol=1e-12)
    assert np.allclose(res.state.hu, 10.0, rtol=0, atol=1e-12)


def test_periodic_march_conserves_mass():
    grid = Grid.line(100, 1000.0)
    B = bump_1d(grid)
    h0 = 10.0 - B + 0.2 * np.sin(2 * np.pi * grid.x / grid.lx)
    state = FlowState(h0, np.full(grid.nx, 5.0))
    out, steps = march_fixed_bed_1d(state, B, grid, 200.0, G, PERIODIC, 0.9, True)
    assert steps > 10
    assert out.h.sum() == pytest.approx(h0.sum(), rel=1e-13)


def _dune_steady(n=400, tol=1e-10):
    grid = Grid.line(n, 1000.0)
    B = dune_bed_1d(grid.x)
    state = FlowState(10.0 - B, np.full(n, 10.0))
    cfg = SteadyConfig(tol=tol, max_iter=200000, boundary=Boundary(discharge=10.0))
    return grid, B, solve_steady(B, grid, cfg, state)


def test_steady_dune_discharge_and_bernoulli_crest():
    grid, B, res = _dune_steady()
    assert res.converged and res.subcritical
    h, hu = res.state.h, res.state.hu
    assert np.max(np.abs(hu - 10.0)) <= 1e-4 * 10.0
    # energy head is conserved in smooth subcritical flow: h + q^2/(2 g h^2) + B
    q = 10.0
    head = h[0] + q**2 / (2 * G * h[0] ** 2) + B[0]
    crest = np.argmax(B)
    exact = brentq(lambda d: d + q**2 / (2 * G * d * d) + B[crest] - head, 5.0, 12.0)
    assert exact == pytest.approx(8.99, abs=0.01)
    assert h[crest] == pytest.approx(exact, abs=5e-3)
    # free surface dips over the crest in subcritical flow
    assert (h + B)[crest] < (h + B)[0]


def test_solver_rejects_dry_cells():
    grid = Grid.line(10, 1.0)
    with pytest.raises(SolverError):
        roe_step_fixed_bed(FlowState(np.zeros(10), np.zeros(10)), np.zeros(10), grid, 0.01)


def test_2d_strip_reproduces_1d():
    n, ny = 60, 4
    g1 = Grid.line(n, 1000.0)
    g2 = Grid.plane(n, ny, 1000.0, 1000.0)
    B1 = dune_bed_1d(g1.x)
    B2 = np.repeat(B1[:, None], ny, axis=1)
    bnd = Boundary(discharge=10.0)
    s1 = FlowState(10.0 - B1, np.full(n, 10.0))
    s2 = FlowState(10.0 - B2, np.full((n, ny), 10.0), np.zeros((n, ny)))
    # a 2D step is x(dt/2) y(dt) x(dt/2); the y-sweep must leave a y-uniform
    # strip untouched, so it equals two 1D half steps
    for _ in range(100):
        s1 = roe_step_fixed_bed(s1, B1, g1, 0.5, G, bnd, True)
        s1 = roe_step_fixed_bed(s1, B1, g1, 0.5, G, bnd, True)
        s2 = roe_step_fixed_bed(s2, B2, g2, 1.0, G, bnd, True)
    assert np.max(np.abs(s2.hv)) == 0.0
    assert np.max(np.abs(s2.h - s1.h[:, None])) < 1e-12
    assert np.max(np.abs(s2.hu - s1.hu[:, None])) < 1e-12
    # steady states agree up to where each pseudo-time march stopped
    cfg = SteadyConfig(tol=1e-11, max_iter=100000, boundary=bnd)
    r1 = solve_steady(B1, g1, cfg, s1)
    r2 = solve_steady(B2, g2, cfg, s2)
    assert r1.converged and r2.converged
    assert np.max(np.abs(r2.state.h - r1.state.h[:, None])) < 1e-6
    assert np.max(np.abs(r2.state.hu - r1.state.hu[:, None])) < 1e-6


@pytest.mark.slow
def test_2d_steady_discharge_balance():
    grid = Grid.plane(32, 32, 1000.0, 1000.0)
    B = bump_2d(grid, 1.0)
    z = np.zeros(grid.shape)
    state = FlowState(10.0 - B, np.full(grid.shape, 10.0), z)
    cfg = SteadyConfig(tol=1e-8, max_iter=200000, boundary=Boundary(discharge=10.0))
    res = solve_steady(B, grid, cfg, state)
    assert res.converged and res.subcritical
    # with reflective side walls every cross-section carries the inflow discharge
    section = res.state.hu.sum(axis=1) * grid.dy
    assert np.max(np.abs(section - 10.0 * grid.ly)) < 2e-3 * 10.0 * grid.ly
    # mirror symmetry about the bump's y position is not imposed, but the flow
    # must be deflected around the bump: v changes sign across it
    j = int(np.argmin(np.abs(grid.y - 0.45 * grid.ly)))
    i = int(np.argmin(np.abs(grid.x - 0.45 * grid.lx)))
    v = res.state.v
    assert v[i, j + 3] * v[i, j - 3] < 0.0


def _coupled_waves(hl, ul, hr, ur, Bl, Br, eps, law):
    kind, par = law.kernel_params()
    h = np.array([hl, hl, hl, hr, hr, hr])
    hu = h * np.array([ul, ul, ul, ur, ur, ur])
    B = np.array([Bl, Bl, Bl, Br, Br, Br])
    s, beta, e, work = (np.zeros((3, 6)) for _ in range(4))
    smax = K.waves_coupled_1d(h, hu, B, G, eps, kind, par, s, beta, e, work)
    return smax, s[:, 3], beta[:, 3], e[:, 3]


@pytest.mark.parametrize("u", [0.3, 1.0, 2.5, -1.7])
def test_coupled_wave_speeds_match_dense_eigenvalues(u):
    law, eps, h = Grass(m=3.0), 0.02, 2.0
    _, s, _, _ = _coupled_waves(h, u, h, u, 0.1, 0.1, eps, law)
    lam = float(law.lambda_b_tilde(abs(u)))
    A = np.array([[0.0, 1.0, 0.0],
                  [G * h - u * u, 2 * u, G * h],
                  [-eps * lam * u / h, eps * lam / h, 0.0]])
    assert np.allclose(np.sort(s), np.sort(np.linalg.eigvals(A).real), rtol=1e-12, atol=1e-14)


def test_coupled_waves_split_the_flux_jump_exactly():
    law, eps = Grass(m=3.0), 0.02
    hl, ul, hr, ur, Bl, Br = 2.0, 1.1, 1.7, 1.4, 0.1, 0.3
    _, s, beta, e = _coupled_waves(hl, ul, hr, ur, Bl, Br, eps, law)
    hbar = 0.5 * (hl + hr)
    d = [hr * ur - hl * ul,
         hr * ur * ur - hl * ul * ul + G * hbar * ((hr - hl) + (Br - Bl)),
         eps * (ur * float(law.qb_tilde(abs(ur))) - ul * float(law.qb_tilde(abs(ul))))]
    # eigenvectors are (1, s, e): the waves must add back to the jump
    assert np.allclose([beta.sum(), beta @ s, beta @ e], d, rtol=1e-12, atol=1e-15)


def test_decoupled_run_reproduces_fixed_bed_march():
    grid = Grid.line(120, 1000.0)
    B = dune_bed_1d(grid.x)
    state = FlowState(10.0 - B, np.full(grid.nx, 10.0))
    bnd = Boundary(discharge=10.0)
    fixed, n1 = march_fixed_bed_1d(state, B, grid, 300.0, G, bnd, 0.9, True)
    coupled, bed, n2 = coupled_roe_run_1d(state, B, grid, Grass(A_g=0.0), 300.0, G, bnd, 0.9)
    assert n1 == n2
    assert np.array_equal(bed, B)
    assert np.array_equal(coupled.h, fixed.h) and np.array_equal(coupled.hu, fixed.hu)
