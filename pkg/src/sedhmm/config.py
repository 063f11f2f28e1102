"""Flat run configuration, named presets and the key=value file format.

A configuration file holds one ``key = value`` pair per line; ``#`` starts a
comment.  Keys are the field names of :class:`RunConfig` and values are
parsed according to the field's type (``int``, ``float``, ``bool``, ``str``).
Unknown keys and unparsable values raise :class:`ConfigError`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields, replace
from pathlib import Path

SCHEMES = ("first", "second", "second-no-eps")
LAWS = ("grass", "mpm")


class ConfigError(ValueError):
    """Invalid preset name, key or value."""


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a simulation, in dimensional (SI) units.

    Scale fields ``L``, ``H`` and ``U`` left at 0 are filled from the domain
    length, the water level and ``discharge / water_level``.
    """

    preset: str = "dune1d"
    ndim: int = 1
    n: int = 256
    ny: int = 1
    length: float = 1000.0
    width: float = 1000.0
    water_level: float = 10.0
    discharge: float = 10.0
    gravity: float = 9.81
    law: str = "grass"
    A_g: float = 0.001
    m: float = 3.0
    gamma: float = 0.4
    u_cr: float = 0.0
    T: float = 238079.0
    K: int = 2
    scheme: str = "second"
    bed_cfl: float = 0.65
    steady_tol: float = 1e-6
    steady_max_iter: int = 20000
    steady_cfl: float = 0.9
    linear_tol: float = 1e-6
    linear_max_iter: int = 0
    ssor_omega: float = 0.955
    L: float = 0.0
    H: float = 0.0
    U: float = 0.0
    nondimensional: bool = True

    def __post_init__(self):
        if self.ndim not in (1, 2):
            raise ConfigError("ndim must be 1 or 2")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.law not in LAWS:
            raise ConfigError(f"law must be one of {LAWS}, got {self.law!r}")
        if self.n < 3 or (self.ndim == 2 and self.ny < 3):
            raise ConfigError("mesh needs at least 3 cells per direction")
        if not self.T > 0:
            raise ConfigError("end time T must be positive")
        if self.K < 1:
            raise ConfigError("K must be at least 1")
        if not 0 < self.bed_cfl <= 1:
            raise ConfigError("bed_cfl must lie in (0, 1]")
        if min(self.length, self.width, self.water_level, self.gravity) <= 0:
            raise ConfigError("lengths, water level and gravity must be positive")
        if min(self.L, self.H, self.U) < 0:
            raise ConfigError("scales must be positive (or 0 for automatic)")

    @property
    def scales(self) -> tuple[float, float, float]:
        L = self.L or self.length
        H = self.H or self.water_level
        U = self.U or abs(self.discharge) / self.water_level or 1.0
        return L, H, U


PRESETS: dict[str, RunConfig] = {
    "dune1d": RunConfig(),
    "mpm1d": RunConfig(preset="mpm1d", law="mpm", u_cr=0.5),
    "dune2d": RunConfig(preset="dune2d", ndim=2, n=128, ny=128, T=3.6e5, K=2, bed_cfl=0.5),
    "convergence1d": RunConfig(preset="convergence1d", T=90000.0, K=1),
    "timing1d": RunConfig(preset="timing1d", T=90000.0, K=1),
    "linear-orders": RunConfig(preset="linear-orders"),
}


def _parse_value(name: str, kind, text: str):
    text = text.strip()
    try:
        if kind in (bool, "bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"cannot parse {name}={text!r} as {kind}") from None


def apply_overrides(cfg: RunConfig, pairs: dict[str, str]) -> RunConfig:
    """Return ``cfg`` with string-valued overrides parsed and applied."""
    types = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for key, raw in pairs.items():
        if key not in types:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[key] = _parse_value(key, types[key], raw)
    try:
        return replace(cfg, **values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_pairs(lines) -> dict[str, str]:
    """Parse ``key=value`` lines (``#`` comments, blank lines ignored)."""
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Read a configuration file; a ``preset`` key selects the starting preset."""
    pairs = parse_pairs(Path(path).read_text().splitlines())
    if base is None:
        base = preset(pairs.get("preset", "dune1d"))
    return apply_overrides(base, pairs)


def preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def dump_config(cfg: RunConfig) -> str:
    """Inverse of :func:`load_config` (round-trips every field)."""
    lines = []
    for key, value in dataclasses.asdict(cfg).items():
        if isinstance(value, float):
            value = "%.17g" % value
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
