"""Batch scenario driver.

Subcommands read a TOML scenario config (flags override the grid, seed and
output path), run the requested computation, write a CSV trace atomically
and print a short machine-readable report. Exit status 0 on success, 2 on
validation failure, 3 on a numerical-check failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import (
    BOUND_ENSEMBLE,
    DIVISIBILITY,
    GENERIC,
    SPIN_BOSON,
    ZASSENHAUS_SCAN,
    ConfigError,
    ScenarioConfig,
    load_config,
)
from .divisibility import RESIDUAL_TOL, divisibility_residual
from .dynamics import two_level_spectrum, uniform_grid
from .entropy import entropy_trace, kitaev_bound_report
from .linalg import NumericalCheckError
from .model import InitialState
from .sampling import random_hermitian, random_state, random_system
from .spinboson import (
    SpinBosonParams,
    build_model,
    cross_check,
    uniform_product_start,
)
from .zassenhaus import truncation_order_scan

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file and rename, so partial runs never leave half a file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    atomic_write(path, "\n".join(lines) + "\n")


def _resolve_out(args, cfg: ScenarioConfig, default: str) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.out_path:
        return Path(cfg.out_path)
    return Path(default)


def _apply_overrides(args, cfg: ScenarioConfig) -> None:
    if args.tmax is not None:
        if args.tmax <= 0:
            raise ConfigError("--tmax must be positive")
        cfg.t_max = args.tmax
    if args.steps is not None:
        if args.steps < 2:
            raise ConfigError("--steps must be >= 2")
        cfg.steps = args.steps
    if args.seed is not None:
        cfg.seed = args.seed


def _load(args, allowed_kinds: tuple[str, ...], command: str) -> ScenarioConfig:
    if not args.config:
        raise ConfigError(f"'{command}' needs --config")
    cfg = load_config(args.config)
    if cfg.kind not in allowed_kinds:
        raise ConfigError(
            f"'{command}' expects a scenario of kind {', '.join(allowed_kinds)}; "
            f"config declares '{cfg.kind}'"
        )
    _apply_overrides(args, cfg)
    return cfg


def _sigma_extremes(reduced) -> tuple[float, float]:
    if reduced.dim_a == 2:
        spectrum = two_level_spectrum(reduced)
        return spectrum.sigma11, spectrum.sigma22
    evals = np.linalg.eigvalsh(reduced.mat)
    return float(evals[0]), float(evals[-1])


TRACE_HEADER = [
    "t", "S_nats", "S_bits", "purity_A", "sigma11", "sigma22", "bound_rhs", "rate_at_zero",
]


def cmd_simulate(args) -> int:
    cfg = _load(args, (GENERIC, SPIN_BOSON), "simulate")
    if cfg.kind == GENERIC:
        system, init = cfg.system, cfg.initial
    else:
        system = build_model(cfg.spinboson)
        init = uniform_product_start(system.dim_a, system.dim_e)
    grid = uniform_grid(cfg.t_max, cfg.steps)
    trace, states = entropy_trace(system, init, grid)
    rows = []
    for t, s, reduced in zip(trace.times, trace.entropy, states):
        lo, hi = _sigma_extremes(reduced)
        rows.append([
            _fmt(t), _fmt(s), _fmt(s / math.log(2)), _fmt(reduced.purity()),
            _fmt(lo), _fmt(hi), _fmt(trace.bound_rhs), _fmt(trace.rate_at_zero.value),
        ])
    out = _resolve_out(args, cfg, "trace.csv")
    write_csv(out, TRACE_HEADER, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    print(f"rate_at_zero = {_fmt(trace.rate_at_zero.value)}")
    print(f"rate_converged = {str(trace.rate_at_zero.converged).lower()}")
    print(f"bound_rhs = {_fmt(trace.bound_rhs)}")
    return EXIT_OK


def cmd_bound(args) -> int:
    cfg = _load(args, (GENERIC, BOUND_ENSEMBLE), "bound")
    if cfg.kind == GENERIC:
        report = kitaev_bound_report(cfg.system, cfg.initial, c=args.c_constant)
        ratio = "undefined" if report.ratio is None else _fmt(report.ratio)
        lines = [
            f"rate_at_zero = {_fmt(report.rate.value)}",
            f"rate_error = {_fmt(report.rate.error)}",
            f"rate_converged = {str(report.rate.converged).lower()}",
            f"coupling_norm = {_fmt(report.coupling_norm)}",
            f"delta_dim = {report.delta_dim}",
            f"c_constant = {_fmt(report.c_constant)}",
            f"bound_rhs = {_fmt(report.bound_rhs)}",
            f"ratio = {ratio}",
            f"satisfied = {str(report.satisfied).lower()}",
        ]
        out = _resolve_out(args, cfg, "bound.txt")
        atomic_write(out, "\n".join(lines) + "\n")
        print("\n".join(lines))
        return EXIT_OK

    if cfg.seed is None:
        raise ConfigError("bound-ensemble needs a seed (top-level 'seed' or --seed)")
    rows = []
    for k in range(cfg.ensemble_count):
        member_seed = cfg.seed + k
        rng = np.random.default_rng(member_seed)
        system = random_system(rng, cfg.ensemble_dim_a, cfg.ensemble_dim_e)
        init = InitialState.product(
            random_state(rng, system.dim_a), random_state(rng, system.dim_e)
        )
        report = kitaev_bound_report(system, init, c=args.c_constant)
        finite = [report.rate.value, report.coupling_norm]
        if report.ratio is not None:
            finite.append(report.ratio)
        if not all(math.isfinite(v) for v in finite):
            raise NumericalCheckError(f"non-finite bound row for seed {member_seed}")
        ratio = report.ratio if report.ratio is not None else math.nan
        rows.append([
            str(member_seed), _fmt(report.rate.value), _fmt(report.coupling_norm),
            _fmt(ratio),
        ])
    out = _resolve_out(args, cfg, "bound_ensemble.csv")
    write_csv(out, ["seed", "rate", "norm_hae", "ratio"], rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return EXIT_OK


def cmd_divisibility(args) -> int:
    cfg = _load(args, (DIVISIBILITY,), "divisibility")
    t = cfg.divisibility_t
    splits = np.array(cfg.split_fractions) * t
    report = divisibility_residual(cfg.system, cfg.env_weights, t, splits)
    rows = []
    for s, r in zip(report.split_times, report.split_residuals):
        verdict = "divisible" if r <= RESIDUAL_TOL else "non-divisible"
        rows.append([_fmt(s), _fmt(r), verdict])
    out = _resolve_out(args, cfg, "divisibility.csv")
    write_csv(out, ["split_time", "residual", "verdict"], rows)
    print(f"wrote {out} ({len(rows)} rows)")
    print(f"condition_class = {report.condition_class}")
    print(f"max_residual = {_fmt(report.residual)}")
    print(f"verdict = {report.verdict}")
    return EXIT_OK


SPINBOSON_HEADER = [
    "t", "omega_closed", "omega_closed_imag", "omega_poly_re", "omega_poly_im",
    "oracle_factor_re", "oracle_factor_im", "ratio_abs", "S_raw", "S_normalized",
    "S_oracle",
]


def cmd_spinboson(args) -> int:
    if args.config:
        cfg = _load(args, (SPIN_BOSON,), "spinboson")
    else:
        cfg = ScenarioConfig(kind=SPIN_BOSON)
        cfg.spinboson = SpinBosonParams(omega=1.0, beta=1.0, eta=0.5, j=0.5, nmax=1)
        _apply_overrides(args, cfg)
    params = cfg.spinboson
    try:
        params = SpinBosonParams(
            omega=args.omega if args.omega is not None else params.omega,
            beta=args.beta if args.beta is not None else params.beta,
            eta=args.eta if args.eta is not None else params.eta,
            j=args.j if args.j is not None else params.j,
            nmax=args.nmax if args.nmax is not None else params.nmax,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    grid = uniform_grid(cfg.t_max, cfg.steps)
    report = cross_check(params, grid, oracle_nmax=cfg.oracle_nmax)
    rows = []
    for k, t in enumerate(report.times):
        rows.append([
            _fmt(t),
            _fmt(report.omega_closed[k]),
            _fmt(report.omega_closed_imag[k]),
            _fmt(report.omega_polynomial[k].real),
            _fmt(report.omega_polynomial[k].imag),
            _fmt(report.oracle_factor[k].real),
            _fmt(report.oracle_factor[k].imag),
            _fmt(abs(report.ratio[k])),
            _fmt(report.entropy_raw[k]),
            _fmt(report.entropy_normalized[k]),
            _fmt(report.entropy_oracle[k]),
        ])
    out = _resolve_out(args, cfg, "spinboson.csv")
    write_csv(out, SPINBOSON_HEADER, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    print(f"verdict = {report.verdict}")
    print(f"scale_factor_at_zero = {_fmt(report.scale_factor_at_zero)}")
    print(f"rate_closed = {_fmt(report.rate_closed)}")
    print(f"rate_oracle = {_fmt(report.rate_oracle.value)}")
    print(f"truncation_drift = {_fmt(report.truncation_drift)}")
    return EXIT_OK


def cmd_zassenhaus(args) -> int:
    if args.config:
        cfg = _load(args, (ZASSENHAUS_SCAN,), "zassenhaus")
    else:
        cfg = ScenarioConfig(kind=ZASSENHAUS_SCAN)
        _apply_overrides(args, cfg)
    if args.orders:
        cfg.zass_orders = tuple(args.orders)
    if args.dim is not None:
        cfg.zass_dim = args.dim
    if cfg.seed is None:
        raise ConfigError("zassenhaus-scan needs a seed (top-level 'seed' or --seed)")
    rng = np.random.default_rng(cfg.seed)
    a = random_hermitian(rng, cfg.zass_dim)
    b = random_hermitian(rng, cfg.zass_dim)
    t_values = np.logspace(
        math.log10(cfg.zass_t_min), math.log10(cfg.zass_t_max), cfg.zass_points
    )
    rows = []
    summary = []
    for order in cfg.zass_orders:
        result = truncation_order_scan(
            lambda t: -1j * t * a, lambda t: -1j * t * b, order, t_values
        )
        for t, err, used in zip(result.t_values, result.errors, result.used):
            rows.append([str(order), _fmt(t), _fmt(err), str(bool(used)).lower()])
        if result.degenerate:
            summary.append(f"order {order}: degenerate (errors at machine floor)")
        else:
            summary.append(
                f"order {order}: slope = {result.slope:.4f} (expected {order + 1})"
            )
    out = _resolve_out(args, cfg, "zassenhaus.csv")
    write_csv(out, ["order", "t", "error", "used"], rows)
    print(f"wrote {out} ({len(rows)} rows)")
    for line in summary:
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oqslab",
        description="Exact-evolution scenarios for small open bipartite quantum systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario TOML file")
        p.add_argument("--out", help="output file (overrides the config)")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--tmax", type=float, help="grid end time override")
        p.add_argument("--steps", type=int, help="grid point count override")

    p = sub.add_parser("simulate", help="entropy trace CSV for a model sweep")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bound", help="area-law bound report or seeded ensemble")
    common(p)
    p.add_argument("--c-constant", type=float, default=2.0,
                   help="constant c in the bound (default 2)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("divisibility", help="supermatrix composition residuals")
    common(p)
    p.set_defaults(func=cmd_divisibility)

    p = sub.add_parser("spinboson", help="closed forms vs exact-propagator cross check")
    common(p)
    p.add_argument("--omega", type=float, help="system rotation frequency")
    p.add_argument("--beta", type=float, help="oscillator quantum")
    p.add_argument("--eta", type=float, help="coupling strength")
    p.add_argument("--j", type=float, help="spin (half-integer)")
    p.add_argument("--nmax", type=int, help="closed-form boson truncation")
    p.set_defaults(func=cmd_spinboson)

    p = sub.add_parser("zassenhaus", help="truncation order scan on a seeded pair")
    common(p)
    p.add_argument("--orders", type=int, nargs="+", help="truncation orders to scan")
    p.add_argument("--dim", type=int, help="matrix dimension of the seeded pair")
    p.set_defaults(func=cmd_zassenhaus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
