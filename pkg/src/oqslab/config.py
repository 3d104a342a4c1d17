"""Scenario configuration files: TOML sections describing a batch run.

Dense Hermitian blocks are written as lists of [row, col, re, im] entries;
a missing mirror entry is filled with the conjugate so upper-triangle
input is enough, and the assembled block is validated Hermitian.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import linalg
from .model import BipartiteSystem, InitialState
from .spinboson import DEFAULT_ORACLE_NMAX, SpinBosonParams

GENERIC = "generic-bipartite"
SPIN_BOSON = "spin-boson"
DIVISIBILITY = "divisibility"
ZASSENHAUS_SCAN = "zassenhaus-scan"
BOUND_ENSEMBLE = "bound-ensemble"

SCENARIO_KINDS = (GENERIC, SPIN_BOSON, DIVISIBILITY, ZASSENHAUS_SCAN, BOUND_ENSEMBLE)

DEFAULT_T_MAX = 5.0
DEFAULT_STEPS = 200


class ConfigError(ValueError):
    """Invalid or unreadable scenario configuration."""


@dataclass
class ScenarioConfig:
    kind: str
    seed: int | None = None
    t_max: float = DEFAULT_T_MAX
    steps: int = DEFAULT_STEPS
    out_path: str | None = None
    system: BipartiteSystem | None = None
    initial: InitialState | None = None
    # divisibility
    divisibility_t: float = 1.0
    split_fractions: tuple[float, ...] = (0.25, 0.5, 0.75)
    env_weights: np.ndarray | None = None
    # spin-boson
    spinboson: SpinBosonParams | None = None
    oracle_nmax: int = DEFAULT_ORACLE_NMAX
    # zassenhaus scan
    zass_orders: tuple[int, ...] = (2, 3)
    zass_dim: int = 4
    zass_t_min: float = 1e-3
    zass_t_max: float = 1e-1
    zass_points: int = 7
    # bound ensemble
    ensemble_count: int = 100
    ensemble_dim_a: int = 2
    ensemble_dim_e: int = 2


def _require(table: dict, key: str, types, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing required field '{key}'")
    value = table[key]
    if isinstance(value, bool) and types is not bool:
        raise ConfigError(f"{where}.{key}: expected {types}, got bool")
    if not isinstance(value, types):
        raise ConfigError(f"{where}.{key}: expected {types}, got {type(value).__name__}")
    return value


def _optional(table: dict, key: str, types, where: str, default):
    if key not in table:
        return default
    value = table[key]
    # bools pass isinstance(int) checks; reject them explicitly for numerics
    if isinstance(value, bool) and types is not bool:
        raise ConfigError(f"{where}.{key}: expected {types}, got bool")
    if not isinstance(value, types):
        raise ConfigError(f"{where}.{key}: expected {types}, got {type(value).__name__}")
    return value


def matrix_from_entries(entries, n: int, where: str) -> np.ndarray:
    """Assemble an n x n Hermitian block from [row, col, re, im] rows."""
    if not isinstance(entries, list):
        raise ConfigError(f"{where}: expected a list of [row, col, re, im] entries")
    m = np.zeros((n, n), dtype=complex)
    given = set()
    for idx, row in enumerate(entries):
        if not (isinstance(row, list) and len(row) == 4):
            raise ConfigError(f"{where}[{idx}]: entry must be [row, col, re, im]")
        r, c, re, im = row
        if not (isinstance(r, int) and isinstance(c, int)):
            raise ConfigError(f"{where}[{idx}]: row/col must be integers")
        if not (isinstance(re, (int, float)) and isinstance(im, (int, float))):
            raise ConfigError(f"{where}[{idx}]: re/im must be numbers")
        if not (0 <= r < n and 0 <= c < n):
            raise ConfigError(f"{where}[{idx}]: index ({r}, {c}) outside 0..{n - 1}")
        if (r, c) in given:
            raise ConfigError(f"{where}[{idx}]: duplicate entry for ({r}, {c})")
        given.add((r, c))
        m[r, c] = complex(re, im)
    for (r, c) in given:
        if r != c and (c, r) not in given:
            m[c, r] = m[r, c].conjugate()
    try:
        linalg.assert_hermitian(m, name=where)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return m


def _complex_vector(entries, n: int, where: str) -> np.ndarray:
    if not (isinstance(entries, list) and len(entries) == n):
        raise ConfigError(f"{where}: expected a list of {n} [re, im] pairs")
    out = np.zeros(n, dtype=complex)
    for idx, pair in enumerate(entries):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"{where}[{idx}]: expected [re, im]")
        re, im = pair
        if not (isinstance(re, (int, float)) and isinstance(im, (int, float))):
            raise ConfigError(f"{where}[{idx}]: re/im must be numbers")
        out[idx] = complex(re, im)
    return out


def _parse_model(table: dict) -> BipartiteSystem:
    where = "model"
    dim_a = _require(table, "dim_a", int, where)
    dim_e = _require(table, "dim_e", int, where)
    if dim_a < 1 or dim_e < 1:
        raise ConfigError(f"{where}: dimensions must be >= 1")
    h_a = matrix_from_entries(table.get("h_a", []), dim_a, f"{where}.h_a")
    h_e = matrix_from_entries(table.get("h_e", []), dim_e, f"{where}.h_e")
    h_ae = matrix_from_entries(table.get("h_ae", []), dim_a * dim_e, f"{where}.h_ae")
    try:
        return BipartiteSystem(dim_a=dim_a, dim_e=dim_e, h_a=h_a, h_e=h_e, h_ae=h_ae)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_initial(table: dict, system: BipartiteSystem) -> InitialState:
    where = "initial"
    kind = _require(table, "kind", str, where)
    try:
        if kind == "product":
            c = _complex_vector(_require(table, "system", list, where), system.dim_a,
                                f"{where}.system")
            e = _complex_vector(_require(table, "env", list, where), system.dim_e,
                                f"{where}.env")
            return InitialState.product(c, e)
        if kind == "pure":
            entries = _require(table, "amplitudes", list, where)
            amp = np.zeros((system.dim_a, system.dim_e), dtype=complex)
            seen = set()
            for idx, row in enumerate(entries):
                if not (isinstance(row, list) and len(row) == 4):
                    raise ConfigError(
                        f"{where}.amplitudes[{idx}]: entry must be [i, alpha, re, im]"
                    )
                i, alpha, re, im = row
                if not (isinstance(i, int) and isinstance(alpha, int)):
                    raise ConfigError(f"{where}.amplitudes[{idx}]: indices must be integers")
                if not (isinstance(re, (int, float)) and isinstance(im, (int, float))):
                    raise ConfigError(f"{where}.amplitudes[{idx}]: re/im must be numbers")
                if not (0 <= i < system.dim_a and 0 <= alpha < system.dim_e):
                    raise ConfigError(f"{where}.amplitudes[{idx}]: index out of range")
                if (i, alpha) in seen:
                    raise ConfigError(
                        f"{where}.amplitudes[{idx}]: duplicate entry for ({i}, {alpha})"
                    )
                seen.add((i, alpha))
                amp[i, alpha] = complex(re, im)
            return InitialState.pure(amp)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: unknown kind '{kind}' (use 'product' or 'pure')")


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file; raises ConfigError with the field path."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    kind = _require(data, "scenario", str, str(path))
    if kind not in SCENARIO_KINDS:
        raise ConfigError(
            f"scenario: unknown kind '{kind}', expected one of {', '.join(SCENARIO_KINDS)}"
        )
    cfg = ScenarioConfig(kind=kind)
    cfg.seed = _optional(data, "seed", int, "top level", None)

    grid = data.get("grid", {})
    cfg.t_max = float(_optional(grid, "t_max", (int, float), "grid", DEFAULT_T_MAX))
    cfg.steps = _optional(grid, "steps", int, "grid", DEFAULT_STEPS)
    if cfg.t_max <= 0:
        raise ConfigError("grid.t_max must be positive")
    if cfg.steps < 2:
        raise ConfigError("grid.steps must be >= 2")

    output = data.get("output", {})
    cfg.out_path = _optional(output, "path", str, "output", None)

    if kind in (GENERIC, DIVISIBILITY):
        if "model" not in data:
            raise ConfigError(f"scenario '{kind}' needs a [model] section")
        cfg.system = _parse_model(data["model"])

    if kind == GENERIC:
        if "initial" not in data:
            raise ConfigError("scenario 'generic-bipartite' needs an [initial] section")
        cfg.initial = _parse_initial(data["initial"], cfg.system)

    if kind == DIVISIBILITY:
        section = data.get("divisibility", {})
        cfg.divisibility_t = float(
            _optional(section, "t", (int, float), "divisibility", 1.0)
        )
        if cfg.divisibility_t <= 0:
            raise ConfigError("divisibility.t must be positive")
        fractions = _optional(section, "splits", list, "divisibility", None)
        if fractions is not None:
            for idx, f in enumerate(fractions):
                if not isinstance(f, (int, float)) or not 0 < f < 1:
                    raise ConfigError(
                        f"divisibility.splits[{idx}]: split fractions must lie in (0, 1)"
                    )
            cfg.split_fractions = tuple(float(f) for f in fractions)
        if "env_weights" not in section:
            raise ConfigError("divisibility.env_weights is required")
        cfg.env_weights = matrix_from_entries(
            section["env_weights"], cfg.system.dim_e, "divisibility.env_weights"
        )

    if kind == SPIN_BOSON:
        section = data.get("spinboson", {})
        try:
            cfg.spinboson = SpinBosonParams(
                omega=float(_optional(section, "omega", (int, float), "spinboson", 1.0)),
                beta=float(_optional(section, "beta", (int, float), "spinboson", 1.0)),
                eta=float(_optional(section, "eta", (int, float), "spinboson", 0.5)),
                j=float(_optional(section, "j", (int, float), "spinboson", 0.5)),
                nmax=_optional(section, "nmax", int, "spinboson", 1),
            )
        except ValueError as exc:
            raise ConfigError(f"spinboson: {exc}") from exc
        cfg.oracle_nmax = _optional(
            section, "oracle_nmax", int, "spinboson", DEFAULT_ORACLE_NMAX
        )
        if cfg.oracle_nmax < 1:
            raise ConfigError("spinboson.oracle_nmax must be >= 1")

    if kind == ZASSENHAUS_SCAN:
        section = data.get("zassenhaus", {})
        orders = _optional(section, "orders", list, "zassenhaus", [2, 3])
        for idx, o in enumerate(orders):
            if not isinstance(o, int) or o < 1:
                raise ConfigError(f"zassenhaus.orders[{idx}]: orders must be integers >= 1")
        cfg.zass_orders = tuple(orders)
        cfg.zass_dim = _optional(section, "dim", int, "zassenhaus", 4)
        if cfg.zass_dim < 2:
            raise ConfigError("zassenhaus.dim must be >= 2")
        cfg.zass_t_min = float(
            _optional(section, "t_min", (int, float), "zassenhaus", 1e-3)
        )
        cfg.zass_t_max = float(
            _optional(section, "t_max", (int, float), "zassenhaus", 1e-1)
        )
        if not 0 < cfg.zass_t_min < cfg.zass_t_max:
            raise ConfigError("zassenhaus: need 0 < t_min < t_max")
        cfg.zass_points = _optional(section, "points", int, "zassenhaus", 7)
        if cfg.zass_points < 4:
            raise ConfigError("zassenhaus.points must be >= 4")

    if kind == BOUND_ENSEMBLE:
        section = data.get("ensemble", {})
        cfg.ensemble_count = _optional(section, "count", int, "ensemble", 100)
        if cfg.ensemble_count < 1:
            raise ConfigError("ensemble.count must be >= 1")
        cfg.ensemble_dim_a = _optional(section, "dim_a", int, "ensemble", 2)
        cfg.ensemble_dim_e = _optional(section, "dim_e", int, "ensemble", 2)
        if cfg.ensemble_dim_a < 1 or cfg.ensemble_dim_e < 1:
            raise ConfigError("ensemble dimensions must be >= 1")

    return cfg
