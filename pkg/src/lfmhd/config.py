"""Plain-text run configuration.

One ``namespace.key = value`` per line, ``#`` starts a comment, blank
lines ignored.  Unknown keys are a hard error so a misspelled override
can never fall back to a default silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .state import PRESETS


class ConfigError(Exception):
    """Raised for unparseable text, unknown keys, or out-of-range values."""


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_float_list(raw: str) -> tuple[float, ...]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


@dataclass
class GridConfig:
    n1: int = 16
    n2: int = 16
    n3: int = 16
    dealias_fraction: float = 2.0 / 3.0


@dataclass
class PhysicsConfig:
    diffusivity: float = 1.0
    c0: float = 0.25
    epsilon: float = 0.1


@dataclass
class SchemeConfig:
    kappa: float = 0.1
    kappa_list: tuple[float, ...] = ()
    dt: float = 0.0125
    T: float = 0.05
    cfl_safety: float = 0.4
    picard_tol: float = 1e-8
    picard_max_iter: int = 12
    diffusion_tol: float = 1e-9


@dataclass
class DataConfig:
    preset: str = "quiescent"
    amplitude: float = 0.1
    seed: int = 0


@dataclass
class OutputConfig:
    directory: str = "out"
    snapshot_stride: int = 1
    checkpoint: bool = False


@dataclass
class DiagnosticsConfig:
    max_time_order: int = 2
    lemma_suite: bool = False


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    data: DataConfig = field(default_factory=DataConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)


_CASTERS = {
    "grid.n1": int,
    "grid.n2": int,
    "grid.n3": int,
    "grid.dealias_fraction": float,
    "physics.diffusivity": float,
    "physics.c0": float,
    "physics.epsilon": float,
    "scheme.kappa": float,
    "scheme.kappa_list": _parse_float_list,
    "scheme.dt": float,
    "scheme.T": float,
    "scheme.cfl_safety": float,
    "scheme.picard_tol": float,
    "scheme.picard_max_iter": int,
    "scheme.diffusion_tol": float,
    "data.preset": str,
    "data.amplitude": float,
    "data.seed": int,
    "outputs.directory": str,
    "outputs.snapshot_stride": int,
    "outputs.checkpoint": _parse_bool,
    "diagnostics.max_time_order": int,
    "diagnostics.lemma_suite": _parse_bool,
}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cfg = RunConfig()
    sections = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        caster = _CASTERS.get(key)
        if caster is None:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        section_name, _, attr = key.partition(".")
        try:
            value = caster(raw_value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
        setattr(sections[section_name], attr, value)
    _validate(cfg, source)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def _require(cond: bool, source: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{source}: {message}")


def _validate(cfg: RunConfig, source: str) -> None:
    g, p, s, d = cfg.grid, cfg.physics, cfg.scheme, cfg.data
    _require(g.n1 >= 8 and g.n1 % 2 == 0, source, f"grid.n1 must be even and >= 8, got {g.n1}")
    _require(g.n2 >= 8 and g.n2 % 2 == 0, source, f"grid.n2 must be even and >= 8, got {g.n2}")
    _require(g.n3 >= 8, source, f"grid.n3 must be >= 8, got {g.n3}")
    _require(0.0 < g.dealias_fraction <= 1.0, source,
             f"grid.dealias_fraction must lie in (0, 1], got {g.dealias_fraction}")
    _require(p.diffusivity > 0.0, source, "physics.diffusivity must be positive")
    _require(p.c0 >= 0.0, source, "physics.c0 must be nonnegative")
    _require(p.epsilon > 0.0, source, "physics.epsilon must be positive")
    _require(s.kappa > 0.0, source, f"scheme.kappa must be positive, got {s.kappa}")
    for k in s.kappa_list:
        _require(k > 0.0, source, f"scheme.kappa_list entries must be positive, got {k}")
    if s.kappa_list:
        _require(all(a > b for a, b in zip(s.kappa_list, s.kappa_list[1:])), source,
                 f"scheme.kappa_list must be strictly decreasing, got {list(s.kappa_list)}")
    _require(s.dt > 0.0, source, "scheme.dt must be positive")
    _require(s.T > 0.0, source, "scheme.T must be positive")
    _require(0.0 < s.cfl_safety <= 1.0, source,
             f"scheme.cfl_safety must lie in (0, 1], got {s.cfl_safety}")
    _require(s.picard_tol > 0.0, source, "scheme.picard_tol must be positive")
    _require(s.picard_max_iter >= 1, source, "scheme.picard_max_iter must be >= 1")
    _require(s.diffusion_tol > 0.0, source, "scheme.diffusion_tol must be positive")
    _require(d.preset in PRESETS, source,
             f"data.preset must be one of {list(PRESETS)}, got {d.preset!r}")
    _require(d.amplitude >= 0.0, source, "data.amplitude must be nonnegative")
    _require(cfg.outputs.snapshot_stride >= 1, source, "outputs.snapshot_stride must be >= 1")
    _require(cfg.diagnostics.max_time_order in (1, 2), source,
             f"diagnostics.max_time_order must be 1 or 2, got {cfg.diagnostics.max_time_order}")
