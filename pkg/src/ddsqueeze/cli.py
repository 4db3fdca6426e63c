"""Command-line interface.

Subcommands
-----------
verify-dd       residual table and averaged-form classification per winding pair
evolve          noiseless squeezing time series to CSV
noise-ensemble  noise-averaged squeezing time series to CSV
scaling         minimum squeezing against spin count, with log-log slope fits
defaults        print every configuration default as YAML

CSV files are comma separated with ``#``-prefixed header comments (tool
version, full config echo, derived quantities) and floats at 12 significant
digits; reruns with an identical config are byte-identical.

Exit codes: 0 success, 2 usage/config error, 3 numeric failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import (
    ConfigError,
    load_scaling,
    load_scenario,
    load_verify_dd,
    default_yaml,
    echo_lines,
)
from .drivers import ensemble_scenario, evolve_scenario, scaling_sweep, verify_dd_rows
from .dynamics import IntegratorError
from .hamiltonians import QuadratureError
from .squeezing import DegenerateMeanSpinError, squeezing_series

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_SERIES_COLUMNS = ("t", "xi_s_sq", "xi_r_sq", "mean_spin_len", "jx", "jy", "jz")


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return f"{float(x):.12g}"


def _emit(out_path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _header(command: str, cfg, derived: dict) -> list[str]:
    lines = [f"# ddsqueeze {__version__} {command}"]
    section = {"evolve": "scenario", "noise-ensemble": "scenario", "scaling": "scaling", "verify-dd": "verify_dd"}[
        command
    ]
    lines += [f"# config: {line}" for line in echo_lines(cfg, section)]
    lines += [f"# derived: {key}={_fmt(value)}" for key, value in derived.items()]
    return lines


def _series_lines(tm, extra_columns: dict | None = None) -> list[str]:
    samples = squeezing_series(tm)
    names = list(_SERIES_COLUMNS) + list(extra_columns or ())
    lines = [",".join(names)]
    for i, s in enumerate(samples):
        row = [
            _fmt(s.t),
            _fmt(s.xi_s_sq),
            _fmt(s.xi_r_sq),
            _fmt(s.mean_spin_len),
            _fmt(tm.mean[i, 0]),
            _fmt(tm.mean[i, 1]),
            _fmt(tm.mean[i, 2]),
        ]
        for values in (extra_columns or {}).values():
            row.append(_fmt(values[i]))
        lines.append(",".join(row))
    return lines


def _cmd_evolve(args) -> int:
    cfg = load_scenario(args.config, _scenario_overrides(args))
    tm, derived = evolve_scenario(cfg)
    lines = _header("evolve", cfg, derived) + _series_lines(tm)
    _emit(args.out or cfg.output, lines)
    return EXIT_OK


def _cmd_noise_ensemble(args) -> int:
    overrides = _scenario_overrides(args)
    for flag, key in (("alpha", "noise.alpha"), ("sigma_sq", "noise.sigma_sq"),
                      ("n_paths", "noise.n_paths"), ("seed", "noise.master_seed")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    cfg = load_scenario(args.config, overrides)
    if cfg.noise is None:
        raise ConfigError("noise-ensemble needs a noise block (config file or flags)")
    result, derived = ensemble_scenario(cfg, workers=args.workers, xi_average=args.xi_average)
    extra = None
    if args.xi_average:
        extra = {"xi_s_path_mean": result.xi_s_path_mean, "xi_r_path_mean": result.xi_r_path_mean}
    lines = _header("noise-ensemble", cfg, derived) + _series_lines(result.moments, extra)
    _emit(args.out or cfg.output, lines)
    return EXIT_OK


def _cmd_scaling(args) -> int:
    overrides = {}
    if args.n_list:
        overrides["n_list"] = tuple(int(x) for x in args.n_list.split(","))
    if args.hamiltonians:
        overrides["hamiltonians"] = tuple(args.hamiltonians.split(","))
    if args.chi is not None:
        overrides["chi"] = args.chi
    if args.grid_points is not None:
        overrides["grid_points"] = args.grid_points
    cfg = load_scaling(args.config, overrides)
    rows, slopes = scaling_sweep(cfg, workers=args.workers)
    lines = _header("scaling", cfg, {})
    lines += [f"# slope: {name}={_fmt(value)}" for name, value in slopes.items()]
    lines.append("n_spins,hamiltonian,xi_min,xi_min_db,t_min")
    for r in rows:
        lines.append(
            f"{r.n_spins},{r.hamiltonian},{_fmt(r.xi_min)},{_fmt(r.xi_min_db)},{_fmt(r.t_min)}"
        )
    _emit(args.out or cfg.output, lines)
    for name, value in slopes.items():
        print(f"slope[{name}] = {value:.4f}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify_dd(args) -> int:
    overrides = {}
    if args.pairs is not None:
        try:
            overrides["pairs"] = tuple(
                tuple(int(x) for x in pair.split(",")) for pair in args.pairs.split(";")
            )
        except ValueError as exc:
            raise ConfigError(f"could not parse --pairs: {exc}") from exc
    if args.n_spins is not None:
        overrides["n_spins"] = args.n_spins
    cfg = load_verify_dd(args.config, overrides)
    rows, all_ok = verify_dd_rows(cfg)

    columns = ("n_x", "n_y", "residual_x", "residual_y", "residual_z", "dd_valid", "classification", "status")
    widths = (4, 4, 12, 12, 12, 8, 14, 13)
    print("  ".join(name.ljust(w) for name, w in zip(columns, widths)))
    for r in rows:
        cells = (
            str(r["n_x"]),
            str(r["n_y"]),
            f"{r['residual_x']:.3e}",
            f"{r['residual_y']:.3e}",
            f"{r['residual_z']:.3e}",
            str(r["dd_valid"]),
            r["classification"],
            r["status"],
        )
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))

    if args.out or cfg.output:
        lines = _header("verify-dd", cfg, {})
        lines.append(",".join(columns))
        for r in rows:
            lines.append(
                ",".join(
                    [str(r["n_x"]), str(r["n_y"]), _fmt(r["residual_x"]), _fmt(r["residual_y"]),
                     _fmt(r["residual_z"]), str(r["dd_valid"]).lower(), r["classification"], r["status"]]
                )
            )
        _emit(args.out or cfg.output, lines)
    return EXIT_OK if all_ok else EXIT_NUMERIC


def _scenario_overrides(args) -> dict:
    overrides = {}
    for flag, key in (
        ("n_spins", "n_spins"),
        ("hamiltonian", "hamiltonian"),
        ("chi", "chi"),
        ("t_end", "time.t_end"),
        ("dt", "time.dt"),
        ("substeps", "time.substeps_per_period"),
        ("nx", "control.n_x"),
        ("ny", "control.n_y"),
        ("ncyc", "control.n_cyc"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--out", help="output CSV path (default: config output or stdout)")
    p.add_argument("--n-spins", dest="n_spins", type=int)
    p.add_argument("--hamiltonian", choices=("oat", "tat", "dr-averaged", "driven-dd"))
    p.add_argument("--chi", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--substeps", type=int, help="substeps per control period")
    p.add_argument("--nx", type=int, help="x winding number")
    p.add_argument("--ny", type=int, help="y winding number")
    p.add_argument("--ncyc", type=int, help="control periods per optimal squeezing time")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddsqueeze", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"ddsqueeze {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="noiseless squeezing time series")
    _add_scenario_flags(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("noise-ensemble", help="noise-averaged squeezing time series")
    _add_scenario_flags(p)
    p.add_argument("--alpha", type=float, help="inverse noise correlation time")
    p.add_argument("--sigma-sq", dest="sigma_sq", type=float, help="stationary noise variance")
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--seed", type=int, help="master seed for trajectory substreams")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--xi-average", dest="xi_average", action="store_true",
                   help="also average per-path squeezing (extra columns)")
    p.set_defaults(func=_cmd_noise_ensemble)

    p = sub.add_parser("scaling", help="minimum squeezing against spin count")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--n-list", dest="n_list", help="comma-separated spin counts")
    p.add_argument("--hamiltonians", help="comma-separated subset of oat,tat,dr-averaged")
    p.add_argument("--chi", type=float)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("verify-dd", help="first-order decoupling residual table")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--out", help="optional CSV path")
    p.add_argument("--pairs", help="semicolon-separated winding pairs, e.g. '2,1;3,1;5,3'")
    p.add_argument("--n-spins", dest="n_spins", type=int)
    p.set_defaults(func=_cmd_verify_dd)

    p = sub.add_parser("defaults", help="print all configuration defaults as YAML")
    p.set_defaults(func=lambda args: (print(default_yaml(), end=""), EXIT_OK)[1])

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, IntegratorError, DegenerateMeanSpinError, ValueError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
