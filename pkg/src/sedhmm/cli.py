"""Command-line front end.

::

    sedhmm run <preset> [--config FILE] [--set key=value]... --out DIR
    sedhmm study convergence|timing|linear-orders [--set key=value]... --out DIR

Exit status is 0 on success, 2 when a solver fails and 3 for configuration
errors; failures also leave ``error.json`` in the output directory and
print the same record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from .bed import TranscriticalError
from .bench import (DegenerateBedError, convergence_study, run_multiscale, spread_angle,
                    timing_study)
from .config import ConfigError, apply_overrides, dump_config, load_config, preset
from .grid import write_state_csv
from .hydro import SolverError
from .linalg import LinearSolveError
from .linear import SpectrumError, default_spec, order_study

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3

FMT = "%.17g"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FMT % v
    return str(v)


def write_rows(path: Path, rows: list[dict]) -> None:
    """CSV with a header from the first row's keys; floats at 17 digits."""
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not rows:
            return
        keys = list(rows[0])
        w.writerow(keys)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in keys])


def _pairs(items) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def cmd_run(args) -> None:
    cfg = load_config(args.config, preset(args.preset)) if args.config else preset(args.preset)
    cfg = apply_overrides(cfg, _pairs(args.set))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(dump_config(cfg))
    rec = run_multiscale(cfg)
    write_state_csv(out / "state_final.csv", rec.grid, rec.state, rec.bed)
    write_rows(out / "runlog.csv", rec.log)
    summary = [{"quantity": "t", "value": rec.t},
               {"quantity": "macro_steps", "value": rec.macro_steps},
               {"quantity": "samples", "value": rec.samples},
               {"quantity": "steady_failures", "value": rec.steady_failures}]
    summary += [{"quantity": f"wall_{k}", "value": v} for k, v in rec.wall.items()]
    if cfg.ndim == 2:
        try:
            for lobe in ("upper", "lower"):
                summary.append({"quantity": f"spread_angle_{lobe}",
                                "value": spread_angle(rec.bed - rec.bed.min(), rec.grid,
                                                      x_start=500.0, lobe=lobe)})
        except DegenerateBedError:
            pass
    write_rows(out / "report.csv", summary)


def cmd_study(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    overrides = _pairs(args.set)
    if args.kind == "linear-orders":
        eps = _float_list(args.eps) if args.eps else None
        st = order_study(default_spec(), eps_list=eps)
        rows = [{"eps": e, "error0": a, "error1": b, "speed_error": s, "relation_residual": r}
                for e, a, b, s, r in st.rows()]
        write_rows(out / "report.csv", rows)
        write_rows(out / "slopes.csv", [{"slope0": st.slope0, "slope1": st.slope1,
                                         "speed_slope": st.speed_slope}])
        return
    if args.kind == "convergence":
        cfg = apply_overrides(preset("convergence1d"), overrides)
        ns = _int_list(args.ns) if args.ns else (128, 256, 512, 1024)
        rep = convergence_study(cfg, ns=ns, n_ref=args.n_ref)
        write_rows(out / "report.csv", rep.table())
        return
    cfg = apply_overrides(preset("timing1d"), overrides)
    ns = _int_list(args.ns) if args.ns else (256, 512)
    a_values = _float_list(args.a_g) if args.a_g else (0.01, 0.005, 0.001)
    rows = timing_study(cfg, a_values=a_values, ns=ns)
    write_rows(out / "report.csv", [dataclasses.asdict(r) for r in rows])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sedhmm", description="Multiscale riverbed evolution.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario preset")
    r.add_argument("preset")
    r.add_argument("--config", help="key=value file applied on top of the preset")
    r.add_argument("--set", action="append", metavar="KEY=VALUE")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("study", help="convergence, timing or linear-model order study")
    s.add_argument("kind", choices=("convergence", "timing", "linear-orders"))
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.add_argument("--ns", help="comma-separated mesh sizes")
    s.add_argument("--n-ref", type=int, default=8192, help="reference mesh (convergence)")
    s.add_argument("--a-g", help="comma-separated A_g values (timing)")
    s.add_argument("--eps", help="comma-separated eps values (linear-orders)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_study)
    return p


def _fail(out, code: int, exc: BaseException) -> int:
    record = {"status": "config_error" if code == EXIT_CONFIG else "solver_error",
              "exit_code": code, "type": type(exc).__name__, "message": str(exc)}
    text = json.dumps(record, sort_keys=True)
    if out:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(text + "\n")
        except OSError:
            pass
    print(text, file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        args.func(args)
    except (ConfigError, SpectrumError, FileNotFoundError) as exc:
        return _fail(args.out, EXIT_CONFIG, exc)
    except (SolverError, TranscriticalError, LinearSolveError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        return _fail(args.out, EXIT_SOLVER, exc)
    except ValueError as exc:
        traceback.print_exc(file=sys.stderr)
        return _fail(args.out, EXIT_CONFIG, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
