# -*- coding: utf-8 -*-
"""
config.py
Project Configuration Module
=====================

Environment defaults and problem files.

- `load_solver_defaults()` reads AHSOLVE_* variables (a `.env` file is loaded
  first if present, never overriding the process environment).
- `load_problem_config()` parses a JSON problem file into a frozen
  `ProblemConfig`, applying command-line overrides on top.
"""

from __future__ import annotations

import enum
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from ahsolve.errors import ConfigError

try:
    from dotenv import load_dotenv  # type: ignore
    # Load environment variables from a .env file if present.
    # Do not override existing process envs.
    load_dotenv(override=False)
except Exception:
    pass

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------- #
# Environment defaults
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class SolverDefaults:
    """
    Solver settings taken from the environment when a problem file is silent.
    """
    newton_tol: float  # Residual sup-norm target
    newton_max_iters: int  # Newton iteration cap per path step
    krylov_rtol: float  # Relative tolerance of the inner GMRES
    initial_step: float  # First continuation step
    min_step: float  # Continuation step floor
    seed: int  # Seed for random initial guesses


def _env(name: str, default: str, cast):
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"environment variable {name}={raw!r} is not a valid {cast.__name__}") from exc


def load_solver_defaults() -> SolverDefaults:
    """
    Load solver defaults from environment variables.

    Returns:
        SolverDefaults: Configured defaults.
    """
    return SolverDefaults(
        newton_tol=_env("AHSOLVE_NEWTON_TOL", "1e-9", float),
        newton_max_iters=_env("AHSOLVE_NEWTON_MAX_ITERS", "30", int),
        krylov_rtol=_env("AHSOLVE_KRYLOV_RTOL", "1e-10", float),
        initial_step=_env("AHSOLVE_INITIAL_STEP", "0.1", float),
        min_step=_env("AHSOLVE_MIN_STEP", "1e-4", float),
        seed=_env("AHSOLVE_SEED", "0", int),
    )


# --------------------------------------------------------------------------- #
# Problem files
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class GridConfig:
    n: int = 2
    size: int = 8


@dataclass(frozen=True)
class GeometryConfig:
    preset: str = "flat"
    amplitude: float = 0.0


@dataclass(frozen=True)
class OperatorConfig:
    kind: str = "log_sigma_k"
    k: int = 2


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-9
    max_iters: int = 30
    krylov_rtol: float = 1e-10


@dataclass(frozen=True)
class PathConfig:
    initial_step: float = 0.1
    min_step: float = 1e-4
    easy_iters: int = 5
    easy_streak: int = 2


@dataclass(frozen=True)
class MonitorConfig:
    A: Tuple[float, ...] = (1.0,)
    theta: float = 1e-3
    adjoint_kernel: bool = False


@dataclass(frozen=True)
class MmsConfig:
    grids: Tuple[int, ...] = (8, 12, 16)
    derivatives: str = "analytic"


@dataclass(frozen=True)
class SweepConfig:
    grids: Tuple[int, ...] = (8, 12, 16)
    scales: Tuple[float, ...] = (0.25, 0.5, 1.0)


@dataclass(frozen=True)
class ProblemConfig:
    """
    Parsed problem file. Catalog entries (background, target, initial guess,
    subsolution) stay as plain mappings and are resolved by the pipeline.
    """
    grid: GridConfig = GridConfig()
    geometry: GeometryConfig = GeometryConfig()
    operator: OperatorConfig = OperatorConfig()
    background: Mapping[str, Any] = field(default_factory=lambda: {"name": "identity"})
    target: Mapping[str, Any] = field(default_factory=lambda: {"kind": "stationary"})
    subsolution: Mapping[str, Any] = field(default_factory=lambda: {"name": "zero"})
    normalization: str = "sup_zero"
    initial_guess: Mapping[str, Any] = field(default_factory=lambda: {"name": "zero"})
    newton: NewtonConfig = NewtonConfig()
    path: PathConfig = PathConfig()
    monitor: MonitorConfig = MonitorConfig()
    mms: MmsConfig = MmsConfig()
    sweep: SweepConfig = SweepConfig()
    require_subsolution: bool = True
    reject_boundary_level: bool = False
    seed: int = 0
    name: str = "problem"


_SECTIONS = {
    "grid": GridConfig,
    "geometry": GeometryConfig,
    "operator": OperatorConfig,
    "newton": NewtonConfig,
    "path": PathConfig,
    "monitor": MonitorConfig,
    "mms": MmsConfig,
    "sweep": SweepConfig,
}
_MAPPINGS = ("background", "target", "subsolution", "initial_guess")
_SCALARS = ("normalization", "require_subsolution", "reject_boundary_level", "seed", "name")
TARGET_KINDS = ("stationary", "manufactured", "offset", "snapshot")


def _coerce(value: Any, like: Any, where: str) -> Any:
    """Convert a JSON value to the type of the dataclass default `like`."""
    if isinstance(like, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean, got {value!r}")
        return value
    if isinstance(like, tuple):
        items = value if isinstance(value, (list, tuple)) else [value]
        if not items:
            raise ConfigError(f"{where}: expected a non-empty list")
        return tuple(_coerce(item, like[0], where) for item in items)
    if isinstance(like, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(like, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(like, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    return value


def _section(cls, data: Any, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    default = cls()
    unknown = set(data) - set(cls.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {', '.join(sorted(unknown))}")
    values = {key: _coerce(data[key], getattr(default, key), f"{where}.{key}") for key in data}
    return replace(default, **values)


def parse_problem_config(data: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> ProblemConfig:
    """
    Build a ProblemConfig from a decoded JSON document.

    Args:
        data (Mapping): Decoded problem file.
        overrides (Mapping | None): Command-line overrides: grid, k, preset,
            amplitude, tol, seed (None values are ignored).

    Returns:
        ProblemConfig: Validated configuration.

    Raises:
        ConfigError: On unknown keys, type mismatches or invalid values.
    """
    if not isinstance(data, Mapping):
        raise ConfigError("problem file must contain a JSON object")
    allowed = set(_SECTIONS) | set(_MAPPINGS) | set(_SCALARS)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown problem keys: {', '.join(sorted(unknown))}")

    defaults = load_solver_defaults()
    base = ProblemConfig(
        newton=NewtonConfig(defaults.newton_tol, defaults.newton_max_iters, defaults.krylov_rtol),
        path=replace(PathConfig(), initial_step=defaults.initial_step, min_step=defaults.min_step),
        seed=defaults.seed,
    )

    values: Dict[str, Any] = {}
    for key, cls in _SECTIONS.items():
        if key in data:
            current = getattr(base, key)
            merged = {**current.__dict__, **data[key]} if isinstance(data[key], Mapping) else data[key]
            values[key] = _section(cls, merged, key)
    for key in _MAPPINGS:
        if key in data:
            if not isinstance(data[key], Mapping):
                raise ConfigError(f"{key}: expected an object")
            values[key] = dict(data[key])
    for key in _SCALARS:
        if key in data:
            values[key] = _coerce(data[key], getattr(base, key), key)
    config = replace(base, **values)

    config = apply_overrides(config, overrides or {})
    validate_problem_config(config)
    return config


def apply_overrides(config: ProblemConfig, overrides: Mapping[str, Any]) -> ProblemConfig:
    """Apply --grid/--k/--preset/--amplitude/--tol/--seed on top of a config."""
    known = {"grid", "k", "preset", "amplitude", "tol", "seed"}
    unknown = {key for key, value in overrides.items() if value is not None} - known
    if unknown:
        raise ConfigError(f"unknown overrides: {', '.join(sorted(unknown))}")
    get = overrides.get
    if get("grid") is not None:
        config = replace(config, grid=replace(config.grid, size=_coerce(get("grid"), 0, "--grid")))
    if get("k") is not None:
        config = replace(config, operator=replace(config.operator, k=_coerce(get("k"), 0, "--k")))
    if get("preset") is not None:
        config = replace(config, geometry=replace(config.geometry, preset=_coerce(get("preset"), "", "--preset")))
    if get("amplitude") is not None:
        config = replace(config, geometry=replace(config.geometry, amplitude=_coerce(get("amplitude"), 0.0, "--amplitude")))
    if get("tol") is not None:
        config = replace(config, newton=replace(config.newton, tol=_coerce(get("tol"), 0.0, "--tol")))
    if get("seed") is not None:
        config = replace(config, seed=_coerce(get("seed"), 0, "--seed"))
    return config


def validate_problem_config(config: ProblemConfig) -> None:
    """
    Check value ranges that the type coercion cannot express.

    Raises:
        ConfigError: On the first invalid value.
    """
    if config.grid.n not in (1, 2):
        raise ConfigError(f"grid.n must be 1 or 2, got {config.grid.n}")
    if config.grid.size < 4 or config.grid.size % 2:
        raise ConfigError(f"grid.size must be even and ≥ 4, got {config.grid.size}")
    if config.geometry.preset not in ("flat", "perturbed_j"):
        raise ConfigError(f"geometry.preset must be 'flat' or 'perturbed_j', got {config.geometry.preset!r}")
    if config.operator.kind not in ("log_sigma_k", "n_minus_one_ma"):
        raise ConfigError(f"operator.kind must be 'log_sigma_k' or 'n_minus_one_ma', got {config.operator.kind!r}")
    if config.operator.kind == "log_sigma_k" and not 1 <= config.operator.k <= config.grid.n:
        raise ConfigError(f"operator.k must satisfy 1 ≤ k ≤ n={config.grid.n}, got {config.operator.k}")
    if config.operator.kind == "n_minus_one_ma" and config.grid.n < 2:
        raise ConfigError("n_minus_one_ma needs grid.n = 2")
    if config.normalization not in ("sup_zero", "mean_zero"):
        raise ConfigError(f"normalization must be 'sup_zero' or 'mean_zero', got {config.normalization!r}")
    kind = config.target.get("kind", "stationary")
    if kind not in TARGET_KINDS:
        raise ConfigError(f"target.kind must be one of {', '.join(TARGET_KINDS)}, got {kind!r}")
    if kind == "snapshot" and "path" not in config.target:
        raise ConfigError("target.kind 'snapshot' needs target.path")
    if not config.newton.tol > 0 or config.newton.max_iters < 1:
        raise ConfigError("newton.tol must be positive and newton.max_iters ≥ 1")
    if not 0 < config.path.min_step <= config.path.initial_step <= 1:
        raise ConfigError("need 0 < path.min_step ≤ path.initial_step ≤ 1")
    if config.mms.derivatives not in ("analytic", "discrete"):
        raise ConfigError(f"mms.derivatives must be 'analytic' or 'discrete', got {config.mms.derivatives!r}")
    for size in config.mms.grids + config.sweep.grids:
        if size < 4 or size % 2:
            raise ConfigError(f"ladder grid sizes must be even and ≥ 4, got {size}")


def load_problem_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> ProblemConfig:
    """
    Read and validate a JSON problem file.

    Raises:
        ConfigError: Missing file, invalid JSON or invalid content.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"problem file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    config = parse_problem_config(data, overrides)
    target = config.target
    if target.get("kind") == "snapshot" and not Path(target["path"]).is_absolute():
        resolved = dict(target, path=str((path.parent / target["path"]).resolve()))
        config = replace(config, target=resolved)
    logger.debug("Loaded problem '%s' from %s", config.name, path)
    return config


# --------------------------------------------------------------------------- #
# Run configuration
# --------------------------------------------------------------------------- #
class Command(str, enum.Enum):
    SOLVE = "solve"
    SWEEP = "sweep"
    CHECK_SUBSOLUTION = "check-subsolution"
    MMS = "mms"
    REPORT = "report"


@dataclass(frozen=True)
class RunConfig:
    """
    One CLI invocation: command, problem file, output directory, overrides.
    """
    command: Command
    problem_path: Optional[Path]
    out_dir: Path
    overrides: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "command", Command(self.command))
        if self.command is Command.REPORT:
            if not Path(self.out_dir).is_dir():
                raise ConfigError(f"report needs an existing output directory, got {self.out_dir}")
        elif self.problem_path is None or not Path(self.problem_path).is_file():
            raise ConfigError(f"problem file not found: {self.problem_path}")

    def load_problem(self) -> ProblemConfig:
        if self.problem_path is None:
            raise ConfigError(f"'{self.command.value}' needs --config")
        return load_problem_config(Path(self.problem_path), self.overrides)
