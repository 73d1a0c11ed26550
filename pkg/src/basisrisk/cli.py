"""Command-line entry point: reproducible runs that write tidy CSV tables plus a manifest.

Exit codes: 0 success, 1 validation error, 2 numerical failure (including a
failed gaussian-check), 3 I/O error.
"""
import argparse
import json
import math
import os
from pathlib import Path
import sys
import time

import numpy as np
import pandas as pd

from . import _io
from . import flood_pipeline as fp
from .errors import DomainError, FitError
from .evt import pot_fit, qq_exponential
from .gaussian_oracle import GaussianPairSpec
from .simlab import FIGURES, MainSettingConfig, figure_suite, gaussian_check, run_main_setting

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
OUTPUT_ENV = "BASISRISK_OUTPUT_DIR"
Z_LIMIT = 4.0

_MAIN_KEYS = (
    "family", "tau", "n", "seed", "u", "theta_shape", "theta_prime_shape",
    "alpha", "beta", "alpha_prime", "beta_prime",
)

DEFAULTS = {
    "simulate": {k: getattr(MainSettingConfig(), k) for k in _MAIN_KEYS} | {"alpha_prime": None, "beta_prime": None},
    "figures": {"figure": None, "n": 1_000_000, "seed": 0},
    "fit-gpd": {"input": None, "column": "damage_usd", "level": 0.8},
    "floods": {"input": None, "k": 10, "seed": 0, "max_depth": 6, "min_leaf": 10, "deflate": True},
    "gaussian-check": {
        "mu_x": 0.0, "mu_y": 0.0, "sigma_x": 1.0, "sigma_y": 1.0, "rho": 0.5,
        "n": 1_000_000, "seed": 0, "s": None,
    },
}


def _merge(command, args):
    cfg = dict(DEFAULTS[command])
    if args.config:
        loaded = _io.read_config(args.config)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise DomainError(f"unknown config field(s) for {command}: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _outdir(args):
    base = args.out or os.environ.get(OUTPUT_ENV) or "basisrisk_out"
    return Path(base)


def cmd_simulate(cfg, out):
    main = MainSettingConfig(**cfg)
    sample = run_main_setting(main)
    df = pd.DataFrame({"x": sample.x, "y": sample.y})
    return [_io.write_table(df, out / "sample.csv")], {}


def cmd_figures(cfg, out):
    if cfg["figure"] not in FIGURES:
        raise DomainError(f"unknown figure {cfg['figure']!r}; valid ids: {', '.join(FIGURES)}")
    tables = figure_suite(cfg["figure"], n=int(cfg["n"]), seed=int(cfg["seed"]))
    return [_io.write_table(df, out / f"{cfg['figure']}_{name}.csv") for name, df in tables.items()], {}


def _read_column(path, column):
    df = pd.read_csv(path)
    if column not in df.columns:
        raise DomainError(f"input is missing column {column!r}")
    v = pd.to_numeric(df[column], errors="coerce").to_numpy(dtype=float)
    return v[np.isfinite(v)]


def cmd_fit_gpd(cfg, out):
    if not cfg["input"]:
        raise DomainError("fit-gpd needs an input CSV")
    values = _read_column(cfg["input"], cfg["column"])
    fit = pot_fit(values, cfg["level"])
    u = fit.threshold
    qq = qq_exponential(values[values > u] - u)
    outputs = [
        _io.write_json(fit.to_dict(), out / "gpd_fit.json"),
        _io.write_table(pd.DataFrame(qq, columns=["theoretical", "empirical"]), out / "qq.csv"),
    ]
    return outputs, {"fit": fit.to_dict()}


def cmd_floods(cfg, out):
    if not cfg["input"]:
        raise DomainError("floods needs an input CSV")
    records, report = fp.load_events(cfg["input"])
    extra = {"load": {"n_read": report.n_read, "n_kept": report.n_kept, "dropped": report.dropped}}
    if cfg["deflate"]:
        records, a, b = fp.deflate(records)
        extra["deflation"] = {"a": a, "b": b}
    params = fp.TreeParams(max_depth=int(cfg["max_depth"]), min_leaf=int(cfg["min_leaf"]))
    cv = fp.kfold_cv(records, k=int(cfg["k"]), seed=int(cfg["seed"]), params=params)
    outputs = [
        _io.write_table(cv.to_frame(), out / "cv_report.csv"),
        _io.write_table(fp.rmse_by_decile(cv), out / "deciles.csv"),
    ]
    return outputs, extra


def cmd_gaussian_check(cfg, out):
    spec = GaussianPairSpec(cfg["mu_x"], cfg["mu_y"], cfg["sigma_x"], cfg["sigma_y"], cfg["rho"])
    table = gaussian_check(spec, n=int(cfg["n"]), seed=int(cfg["seed"]), s_grid=cfg["s"])
    outputs = [_io.write_table(table, out / "gaussian_check.csv")]
    z = table["z"].to_numpy()
    worst = float(np.nanmax(np.abs(z))) if np.isfinite(z).any() else math.nan
    extra = {"max_abs_z": worst}
    extra["failed"] = worst > Z_LIMIT
    return outputs, extra


COMMANDS = {
    "simulate": cmd_simulate,
    "figures": cmd_figures,
    "fit-gpd": cmd_fit_gpd,
    "floods": cmd_floods,
    "gaussian-check": cmd_gaussian_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="basisrisk", description="Basis-risk simulation and estimation runs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config or a previous manifest.json")
        sp.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./basisrisk_out)")
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("simulate", help="sample (X, Y) from the main setting")
    common(sp)
    sp.add_argument("--family")
    sp.add_argument("--tau", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--u", type=float)
    sp.add_argument("--theta-shape", type=float)
    sp.add_argument("--theta-prime-shape", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--alpha-prime", type=float)
    sp.add_argument("--beta-prime", type=float)

    sp = sub.add_parser("figures", help="tables behind fig1..fig4")
    common(sp)
    sp.add_argument("figure", nargs="?", help=f"one of {', '.join(FIGURES)}")
    sp.add_argument("--n", type=int)

    sp = sub.add_parser("fit-gpd", help="peaks-over-threshold GPD fit of one CSV column")
    common(sp)
    sp.add_argument("input", nargs="?")
    sp.add_argument("--column")
    sp.add_argument("--level", type=float)

    sp = sub.add_parser("floods", help="deflate, cross-validate a regression tree, RMSE by decile")
    common(sp)
    sp.add_argument("input", nargs="?")
    sp.add_argument("--k", type=int)
    sp.add_argument("--max-depth", type=int)
    sp.add_argument("--min-leaf", type=int)
    sp.add_argument("--no-deflate", dest="deflate", action="store_const", const=False)

    sp = sub.add_parser("gaussian-check", help="Monte Carlo against the Gaussian closed forms")
    common(sp)
    sp.add_argument("--mu-x", type=float)
    sp.add_argument("--mu-y", type=float)
    sp.add_argument("--sigma-x", type=float)
    sp.add_argument("--sigma-y", type=float)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--s", type=float, nargs="+", help="thresholds (default mu_x + {0,1,2} sigma_x)")
    return p


def run(argv=None):
    """Run one command; returns ``(exit code, manifest or None)``."""
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        cfg = _merge(command, args)
        out = _outdir(args)
        t0 = time.perf_counter()
        outputs, extra = COMMANDS[command](cfg, out)
        manifest = _io.write_manifest(
            out, command, cfg, cfg.get("seed"), outputs, time.perf_counter() - t0, extra
        )
    except (DomainError, ValueError) as exc:
        print(f"basisrisk {command}: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    except (FitError, FloatingPointError, ArithmeticError) as exc:
        print(f"basisrisk {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC, None
    except OSError as exc:
        print(f"basisrisk {command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO, None
    if manifest.get("failed"):
        print(f"basisrisk {command}: |z| = {manifest['max_abs_z']:.2f} exceeds {Z_LIMIT}", file=sys.stderr)
        return EXIT_NUMERIC, manifest
    print(json.dumps({"outputs": [o["file"] for o in manifest["outputs"]], "dir": str(out)}))
    return EXIT_OK, manifest


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
