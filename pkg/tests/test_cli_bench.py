import csv
import json
from dataclasses import replace

import numpy as np
import pytest

from sedhmm.bench import (DegenerateBedError, convergence_study, coupled_reference, fitted_order,
                          l1_error, pairwise_orders, restrict, run_coupled, run_multiscale,
                          spread_angle)
from sedhmm.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from sedhmm.config import (ConfigError, RunConfig, apply_overrides, dump_config, load_config,
                           preset)
from sedhmm.grid import Grid, read_state_csv


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ------------------------------------------------------------- bench helpers

def test_restriction_conserves_mass():
    rng = np.random.default_rng(3)
    fine = rng.normal(size=1024)
    for n in (8, 128, 1024):
        coarse = restrict(fine, n)
        assert coarse.size == n
        assert coarse.sum() * (1.0 / n) == pytest.approx(fine.sum() / 1024, abs=1e-14)
    assert np.array_equal(restrict(np.repeat([1.0, 2.0, 3.0], 4), 3), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        restrict(fine, 300)


def test_order_helpers():
    ns = np.array([128, 256, 512, 1024])
    errs = 3.0 * ns**-1.5
    assert fitted_order(ns, errs) == pytest.approx(1.5, rel=1e-12)
    p = pairwise_orders(errs)
    assert np.isnan(p[0]) and np.allclose(p[1:], 1.5)
    assert l1_error([1.0, 2.0], [0.0, 4.0], 0.5) == 1.5


def wedge(angle_deg, n=96, width=0.01, lobes=("upper", "lower")):
    grid = Grid.plane(n, n, 1000.0, 1000.0)
    X, Y = grid.mesh()
    x0, mid = 300.0, 500.0
    slope = np.tan(np.radians(angle_deg))
    bed = np.zeros(grid.shape)
    decay = np.exp(-np.clip(X - x0, 0, None) / 800.0) * (X > x0)
    for lobe in lobes:
        sign = 1.0 if lobe == "upper" else -1.0
        ridge = mid + sign * slope * (X - x0)
        bed += decay * np.exp(-((Y - ridge) / (width * 1000.0)) ** 2)
    return grid, bed


@pytest.mark.parametrize("angle", [10.0, 20.0, 30.0])
def test_spread_angle_of_a_synthetic_wedge(angle):
    # lobes are kept narrow: where the two overlap near the apex the
    # per-half maximum is pulled toward the centre line
    grid, bed = wedge(angle)
    up = spread_angle(bed, grid, x_start=300.0, lobe="upper")
    lo = spread_angle(bed, grid, x_start=300.0, lobe="lower")
    assert up == pytest.approx(angle, abs=0.5)
    assert lo == pytest.approx(up, abs=1e-10)


def test_spread_angle_degenerate_beds():
    grid = Grid.plane(16, 16, 1000.0, 1000.0)
    with pytest.raises(DegenerateBedError):
        spread_angle(np.zeros(grid.shape), grid, x_start=0.0)
    _, bed = wedge(20.0, n=16)
    with pytest.raises(DegenerateBedError):
        spread_angle(bed, grid, x_start=990.0)


# -------------------------------------------------------- coupled reference

def test_coupled_and_multiscale_beds_agree_on_a_short_run():
    cfg = replace(preset("convergence1d"), n=64, T=20000.0)
    ref = run_coupled(cfg)
    ms = run_multiscale(cfg)
    assert ref.steps > 100
    dx = cfg.length / cfg.n
    b0 = run_multiscale(replace(cfg, T=1.0)).bed
    change = l1_error(ms.bed, b0, dx)
    assert change > 0.0
    assert l1_error(ref.bed, ms.bed, dx) < 0.1 * change
    # the coupled bed update is in conservation form and the dune stays inside
    assert ref.bed.sum() == pytest.approx(b0.sum(), rel=1e-6)


def test_reference_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("SEDHMM_CACHE", str(tmp_path))
    cfg = replace(preset("convergence1d"), T=3000.0)
    a = coupled_reference(cfg, n_ref=64)
    assert len(list(tmp_path.glob("coupled_*.npz"))) == 1
    b = coupled_reference(cfg, n_ref=64)
    assert np.array_equal(a.bed, b.bed) and a.steps == b.steps
    # the multiscale-only settings do not change the cache key
    coupled_reference(replace(cfg, K=3, scheme="first"), n_ref=64)
    assert len(list(tmp_path.glob("coupled_*.npz"))) == 1


def test_convergence_study_validates_reference_mesh():
    with pytest.raises(ValueError):
        convergence_study(preset("convergence1d"), ns=(64, 128), n_ref=512)


# ------------------------------------------------------------------- config

def test_config_round_trip_and_overrides(tmp_path):
    cfg = apply_overrides(preset("dune2d"), {"A_g": "0.002", "nondimensional": "false",
                                             "K": "3"})
    assert cfg.A_g == 0.002 and cfg.nondimensional is False and cfg.K == 3
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\n" + dump_config(cfg))
    assert load_config(path) == cfg
    for bad in ({"nope": "1"}, {"K": "two"}, {"K": "0"}, {"scheme": "third"}):
        with pytest.raises(ConfigError):
            apply_overrides(RunConfig(), bad)
    with pytest.raises(ConfigError):
        preset("river")


# ---------------------------------------------------------------------- CLI

def cli_run(out, *extra):
    return main(["run", "dune1d", "--set", "n=32", "--set", "T=30000", *extra, "--out", str(out)])


def test_cli_run_writes_outputs(tmp_path):
    assert cli_run(tmp_path) == EXIT_OK
    grid, state, bed = read_state_csv(tmp_path / "state_final.csv")
    assert grid.nx == 32 and grid.lx == pytest.approx(1000.0)
    assert np.all(state.h > 0)
    log = read_rows(tmp_path / "runlog.csv")
    assert float(log[-1]["t"]) == 30000.0
    report = {r["quantity"]: r["value"] for r in read_rows(tmp_path / "report.csv")}
    assert float(report["t"]) == 30000.0 and int(report["steady_failures"]) == 0
    assert load_config(tmp_path / "config.txt") == apply_overrides(
        preset("dune1d"), {"n": "32", "T": "30000"})
    # 17 significant digits
    x = read_rows(tmp_path / "state_final.csv")[1]["x"]
    assert float(x) == 1000.0 / 32 * 1.5


def test_cli_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_run(a) == EXIT_OK and cli_run(b) == EXIT_OK
    assert (a / "state_final.csv").read_bytes() == (b / "state_final.csv").read_bytes()
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall"} for r in rows]
    assert strip(read_rows(a / "runlog.csv")) == strip(read_rows(b / "runlog.csv"))


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("n = 32\nT = 10000\nscheme = first\n")
    assert main(["run", "dune1d", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    assert "scheme = first" in (tmp_path / "o" / "config.txt").read_text()


@pytest.mark.parametrize("args", [
    ["run", "dune1d", "--set", "nope=1"],
    ["run", "river"],
    ["run", "dune1d", "--set", "n=two"],
    ["run", "dune1d", "--set", "K"],
    ["run", "dune1d", "--config", "/nonexistent/cfg.txt"],
])
def test_cli_config_errors(tmp_path, args, capsys):
    out = tmp_path / "o"
    assert main([*args, "--out", str(out)]) == EXIT_CONFIG
    record = json.loads((out / "error.json").read_text())
    assert record["exit_code"] == EXIT_CONFIG and record["status"] == "config_error"
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1]) == record


def test_cli_solver_error_on_supercritical_flow(tmp_path):
    out = tmp_path / "o"
    with pytest.warns(Warning):
        code = main(["run", "dune1d", "--set", "n=32", "--set", "discharge=150",
                     "--out", str(out)])
    assert code == EXIT_SOLVER
    record = json.loads((out / "error.json").read_text())
    assert record["status"] == "solver_error" and record["type"] == "SubcriticalityLost"


def test_cli_argument_errors(tmp_path):
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["run", "dune1d"]) == EXIT_CONFIG       # --out is required


def test_cli_linear_orders_study(tmp_path):
    assert main(["study", "linear-orders", "--eps", "1e-2,5e-3,2.5e-3",
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "report.csv")
    assert [float(r["eps"]) for r in rows] == [1e-2, 5e-3, 2.5e-3]
    slopes = read_rows(tmp_path / "slopes.csv")[0]
    assert 1.8 <= float(slopes["slope1"]) <= 2.2
