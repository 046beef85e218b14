"""Command line front end.

``rvcones SUBCOMMAND (--input PATH | --generate SPEC) [options]``

Every run is computed in memory first.  Output files are written only when
the whole run succeeds, so a failing invocation leaves the output directory
untouched and reports a JSON error block on stderr.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm as normal

from . import __version__
from .condlimit import (
    DEFAULT_C_GRID,
    DEFAULT_LEVELS,
    DEFAULT_PRODUCT_TOL,
    conditional_cdf_empirical,
    empirical_standardize,
    exponential_b_inverse,
    fit_conditioned_limit,
    gaussian_b,
    gaussian_b_inverse,
    standardize_y,
)
from .core import LimitMeasureSpec, NormKind, polar_arrays
from .errors import BadK, ConfigError, DataError, RVConesError
from .estimators import (
    angular_estimate,
    default_k,
    hill,
    hill_path,
    hrv_report,
    max_tail_index,
    min_tail_index,
)
from .evt import block_maxima, empirical_cdf_nd, max_stable_cdf
from .pot import pot_exceedances, radius_threshold
from .presets import Preset, parse_generator
from .report import PLOT_KINDS, Report, clean_float, ingest_csv, plot_rows, validate_report, write_csv
from .samplers import RngStream

SUBCOMMANDS = ("simulate", "estimate", "hrv", "pot", "evt", "condlimit")
Y_MARGINS = ("auto", "normal", "exponential", "empirical")
DEFAULT_TOP_FRACTION = 0.05
DEFAULT_EVT_GRID = (0.5, 1.0, 2.0)
DEFAULT_COND_GRID = tuple(float(v) for v in np.linspace(-3.0, 3.0, 25))


@dataclass
class RunConfig:
    subcommand: str
    input: str | None = None
    generate: str | None = None
    n: int | None = None
    seed: int = 0
    norm: str = "l1"
    k: int | None = None
    k_grid: list | None = None
    top_fraction: float = DEFAULT_TOP_FRACTION
    threshold: float | None = None
    u: float = 0.99
    thresholds: list = field(default_factory=lambda: list(DEFAULT_LEVELS))
    c_grid: list = field(default_factory=lambda: list(DEFAULT_C_GRID))
    tol: float = DEFAULT_PRODUCT_TOL
    block: int = 100
    grid: list | None = None
    y_margin: str = "auto"
    rho: float | None = None
    out: str = "."
    plot: list = field(default_factory=list)

    def echo(self) -> dict:
        # the output location does not affect results, so runs into different directories compare equal
        d = asdict(self)
        del d["out"]
        return d


# --------------------------------------------------------------------------
# argument parsing and validation


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


class _Parser(argparse.ArgumentParser):
    """Report usage problems as configuration errors instead of exiting."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rvcones", description="Regular variation on cones: simulate, estimate, diagnose.")
    p.add_argument("--version", action="version", version=f"rvcones {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, prog=f"rvcones {name}")
        s.add_argument("--input", metavar="PATH")
        s.add_argument("--generate", metavar="SPEC")
        s.add_argument("--n", type=str, metavar="COUNT")
        s.add_argument("--seed", type=str, default="0")
        s.add_argument("--norm", default="l1")
        s.add_argument("--k", type=str)
        s.add_argument("--k-grid", type=str, metavar="LIST")
        s.add_argument("--top-fraction", type=str)
        s.add_argument("--threshold", type=str)
        s.add_argument("--u", type=str)
        s.add_argument("--thresholds", type=str, metavar="LIST")
        s.add_argument("--c-grid", type=str, metavar="LIST")
        s.add_argument("--tol", type=str)
        s.add_argument("--block", type=str)
        s.add_argument("--grid", type=str, metavar="LIST")
        s.add_argument("--y-margin", type=str)
        s.add_argument("--rho", type=str)
        s.add_argument("--out", default=".", metavar="DIR")
        s.add_argument("--plot", action="append", default=[], metavar="KIND")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    """Convert and range-check every option, collecting all problems before raising."""
    errors: list[str] = []
    cfg = RunConfig(ns.subcommand, out=ns.out)

    def conv(flag, raw, fn, check=None, why=""):
        if raw is None:
            return None
        try:
            v = fn(raw)
        except ValueError:
            errors.append(f"--{flag}: cannot parse {raw!r}")
            return None
        if check is not None and not check(v):
            errors.append(f"--{flag}: {raw!r} {why}")
            return None
        return v

    def in01(v):
        return 0 < v < 1

    if (ns.input is None) == (ns.generate is None):
        errors.append("exactly one of --input and --generate is required")
    cfg.input = ns.input
    if ns.input is not None and ns.subcommand == "simulate":
        errors.append("simulate needs --generate, not --input")
    if ns.generate is not None:
        try:
            cfg.generate = parse_generator(ns.generate).spec
        except ConfigError as exc:
            errors.extend(exc.messages)
    cfg.n = conv("n", ns.n, int, lambda v: v >= 2, "must be an integer >= 2")
    if ns.generate is not None and ns.n is None:
        errors.append("--n is required with --generate")
    if ns.input is not None and ns.n is not None:
        errors.append("--n applies only to --generate")
    seed = conv("seed", ns.seed, int, lambda v: v >= 0, "must be a nonnegative integer")
    cfg.seed = 0 if seed is None else seed
    try:
        cfg.norm = NormKind.parse(ns.norm).value
    except (ValueError, ConfigError):
        errors.append(f"--norm: {ns.norm!r} is not one of l1, l2, linf")
    cfg.k = conv("k", ns.k, int, lambda v: v >= 1, "must be a positive integer")
    cfg.k_grid = conv("k-grid", ns.k_grid, _int_list, lambda v: v and min(v) >= 1,
                      "must list positive integers")
    tf = conv("top-fraction", ns.top_fraction, float, in01, "must lie in (0, 1)")
    cfg.top_fraction = DEFAULT_TOP_FRACTION if tf is None else tf
    cfg.threshold = conv("threshold", ns.threshold, float, lambda v: v > 0 and math.isfinite(v),
                         "must be a positive number")
    u = conv("u", ns.u, float, in01, "must lie in (0, 1)")
    cfg.u = 0.99 if u is None else u
    lv = conv("thresholds", ns.thresholds, _float_list,
              lambda v: v and all(0 < x < 1 for x in v) and len(set(v)) == len(v),
              "must list distinct levels in (0, 1)")
    if lv is not None:
        cfg.thresholds = sorted(lv)
    cg = conv("c-grid", ns.c_grid, _float_list, lambda v: v and all(x > 0 for x in v),
              "must list positive ratios")
    if cg is not None:
        cfg.c_grid = cg
    tol = conv("tol", ns.tol, float, lambda v: v > 0, "must be positive")
    cfg.tol = DEFAULT_PRODUCT_TOL if tol is None else tol
    block = conv("block", ns.block, int, lambda v: v >= 1, "must be a positive integer")
    cfg.block = 100 if block is None else block
    grid = conv("grid", ns.grid, _float_list, lambda v: bool(v), "must be a nonempty list")
    if grid is not None and ns.subcommand == "evt" and min(grid) <= 0:
        errors.append("--grid: evt grid points must be positive")
        grid = None
    cfg.grid = grid
    if ns.y_margin is not None and ns.y_margin not in Y_MARGINS:
        errors.append(f"--y-margin: {ns.y_margin!r} is not one of {', '.join(Y_MARGINS)}")
    else:
        cfg.y_margin = ns.y_margin or "auto"
    cfg.rho = conv("rho", ns.rho, float, lambda v: -1 < v < 1, "must lie in (-1, 1)")
    for kind in ns.plot:
        if kind not in PLOT_KINDS:
            errors.append(f"--plot: {kind!r} is not one of {', '.join(PLOT_KINDS)}")
    cfg.plot = list(ns.plot)
    # checks that need the sample size, when it is already known
    if cfg.n is not None:
        errors.extend(_size_checks(cfg, cfg.n))
    if errors:
        raise ConfigError(errors)
    return cfg


def _size_checks(cfg: RunConfig, n: int) -> list[str]:
    errs = []
    if cfg.k is not None and cfg.k >= n:
        errs.append(f"--k: k={cfg.k} must be smaller than the sample size n={n}")
    if cfg.k_grid is not None and max(cfg.k_grid) >= n:
        errs.append(f"--k-grid: every k must be smaller than the sample size n={n}")
    if cfg.subcommand == "evt" and cfg.block > n:
        errs.append(f"--block: block={cfg.block} exceeds the sample size n={n}")
    return errs


# --------------------------------------------------------------------------
# analyses


def load_sample(cfg: RunConfig) -> tuple[np.ndarray, Preset | None]:
    if cfg.generate is not None:
        preset = parse_generator(cfg.generate)
        return preset.sample(RngStream(cfg.seed), cfg.n), preset
    x = ingest_csv(cfg.input)
    errs = _size_checks(cfg, x.shape[0])
    if errs:
        raise BadK(errs)
    return x, None


def _hill_grid(cfg, n, k):
    if cfg.k_grid is not None:
        return sorted(set(cfg.k_grid))
    ks = sorted({max(1, k * j // 10) for j in range(1, 11)})
    return [v for v in ks if v < n]


def _estimate(cfg, x, warnings):
    n, d = x.shape
    k = cfg.k if cfg.k is not None else default_k(n)
    radial, _ = polar_arrays(x, NormKind(cfg.norm))
    block = {
        "n": n,
        "d": d,
        "k": k,
        "norm": cfg.norm,
        "marginal_alpha": [hill(x[:, i], k).alpha_hat for i in range(d)],
        "max_tail": max_tail_index(x, k).alpha_hat,
        "min_tail": min_tail_index(x, k).alpha_hat if d > 1 else None,
        "radius_alpha": hill(radial, k).alpha_hat,
        "hill_plot": [[kk, a] for kk, a in hill_path(radial, _hill_grid(cfg, n, k))],
    }
    try:
        est = angular_estimate(x, cfg.top_fraction, NormKind(cfg.norm))
    except RVConesError as exc:
        warnings.append(f"angular estimate skipped: {exc}")
    else:
        block["angular"] = {
            "alpha_hat": est.alpha_hat,
            "threshold": est.threshold,
            "k": est.k,
            "norm": cfg.norm,
            "atoms": [{"direction": a.tolist(), "weight": float(w)}
                      for a, w in zip(est.angular.directions, est.angular.weights)],
        }
    return block


def _hrv(cfg, x):
    r = hrv_report(x, cfg.k, cfg.u)
    return {
        "alpha_hat": r.alpha_hat,
        "alpha0_hat": r.alpha0_hat,
        "eta_hat": r.eta_hat,
        "lambda_hat": r.lambda_hat,
        "u": r.u,
        "k": r.k,
        "verdict": r.verdict.value,
    }


def _pot(cfg, x, files):
    nk = NormKind(cfg.norm)
    t = cfg.threshold if cfg.threshold is not None else radius_threshold(x, cfg.top_fraction, nk)
    ex = pot_exceedances(x, t, nk)
    d = x.shape[1]
    header = ["r"] + [f"a_{i + 1}" for i in range(d)]
    files["exceedances.csv"] = (header, [[r, *a] for r, a in zip(ex.r, ex.a)])
    return {
        "threshold": float(t),
        "n": int(x.shape[0]),
        "exceedances": len(ex),
        "norm": cfg.norm,
        "exceedance_file": "exceedances.csv",
    }


def _empirical_model(cfg, x):
    """Rank-standardise the margins to unit Pareto and fit the angular measure at top_fraction."""
    z = np.column_stack([empirical_standardize(c) for c in x.T])
    est = angular_estimate(z, cfg.top_fraction, NormKind.L1)
    # unit-Pareto margins under the l1 sphere: scale d so each marginal mass is ~1
    m = LimitMeasureSpec(1.0, est.angular.normalized(), scale=float(x.shape[1]))
    return z, m, (lambda t: t)


def _evt(cfg, x, preset, files, warnings):
    if preset is not None and preset.limit is not None:
        z, m, b, model = x, preset.limit, preset.b, "preset"
    else:
        if preset is not None:
            warnings.append(f"{preset.name} has no closed-form limit; using a fitted model")
        z, m, b, model = (*_empirical_model(cfg, x), "fitted")
    maxima = block_maxima(z, cfg.block) / b(cfg.block)
    d = x.shape[1]
    pts = cfg.grid if cfg.grid is not None else list(DEFAULT_EVT_GRID)
    rows, sup = [], 0.0
    for corner in itertools.product(pts, repeat=d):
        emp = empirical_cdf_nd(maxima, corner)
        mod = max_stable_cdf(m, None, np.asarray(corner))
        sup = max(sup, abs(emp - mod))
        rows.append([*corner, emp, mod, abs(emp - mod)])
    header = [f"x_{i + 1}" for i in range(d)] + ["empirical", "model", "abs_diff"]
    files["evt.csv"] = (header, rows)
    return {
        "block": cfg.block,
        "n_blocks": int(maxima.shape[0]),
        "model": model,
        "alpha": m.alpha,
        "sup_distance": sup,
        "table_file": "evt.csv",
    }


def _condlimit(cfg, x, preset, files, warnings):
    if x.shape[1] != 2:
        raise DataError(f"condlimit needs (X, Y) pairs, got {x.shape[1]} columns")
    rho = cfg.rho if cfg.rho is not None else (preset.rho if preset is not None else None)
    margin = cfg.y_margin
    if margin == "auto":
        margin = "normal" if preset is not None and preset.name == "gaussian" else "empirical"
    if margin == "normal":
        ys = standardize_y(x[:, 1], gaussian_b_inverse)
    elif margin == "exponential":
        ys = standardize_y(x[:, 1], exponential_b_inverse)
    else:
        ys = empirical_standardize(x[:, 1])
    xy = np.column_stack([x[:, 0], ys])
    fit = fit_conditioned_limit(xy, cfg.thresholds, cfg.c_grid, cfg.tol)
    t = float(fit.thresholds[-1])
    grid = cfg.grid if cfg.grid is not None else list(DEFAULT_COND_GRID)
    if rho is not None and margin == "normal":
        center, scale = rho * gaussian_b(t), 1.0
        oracle = [float(v) for v in normal.cdf(np.asarray(grid) / math.sqrt(1 - rho * rho))]
    else:
        if rho is not None:
            warnings.append("oracle column needs normal Y margins; left empty")
        center, scale = float(fit.beta_hat[-1]), float(fit.alpha_scale_hat[-1])
        oracle = [None] * len(grid)
    emp = conditional_cdf_empirical(xy, t, grid, center, scale)
    rows = [[g, float(e), o] for g, e, o in zip(grid, emp, oracle)]
    files["condlimit_cdf.csv"] = (
        ["x", "empirical", "oracle"],
        [[g, e, float("nan") if o is None else o] for g, e, o in rows],
    )
    return {
        "y_margin": margin,
        "rho": rho,
        "thresholds": fit.thresholds.tolist(),
        "beta_hat": fit.beta_hat.tolist(),
        "alpha_scale_hat": fit.alpha_scale_hat.tolist(),
        "exceedances": [int(v) for v in fit.exceedances],
        "c_grid": fit.c_grid.tolist(),
        "psi1": fit.psi1_table.tolist(),
        "psi2": fit.psi2_table.tolist(),
        "product_verdict": bool(fit.product_verdict),
        "cond_cdf": {"t": t, "center": center, "scale": scale, "rows": rows,
                     "table_file": "condlimit_cdf.csv"},
    }


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return clean_float(obj)
    return obj


def run(cfg: RunConfig) -> tuple[Report, dict]:
    """Compute a report and the tables to write, without touching the filesystem."""
    x, preset = load_sample(cfg)
    files: dict[str, tuple] = {}
    warnings: list[str] = []
    results: dict = {}
    sub = cfg.subcommand
    if sub == "simulate":
        files["sample.csv"] = ([f"z_{i + 1}" for i in range(x.shape[1])], x.tolist())
        results["simulate"] = {"generator": preset.spec, "n": int(x.shape[0]),
                               "d": int(x.shape[1]), "seed": cfg.seed, "sample_file": "sample.csv"}
    elif sub == "estimate":
        results["estimate"] = _estimate(cfg, x, warnings)
    elif sub == "hrv":
        results["hrv"] = _hrv(cfg, x)
    elif sub == "pot":
        results["pot"] = _pot(cfg, x, files)
    elif sub == "evt":
        results["evt"] = _evt(cfg, x, preset, files, warnings)
    elif sub == "condlimit":
        results["condlimit"] = _condlimit(cfg, x, preset, files, warnings)
    report = Report(__version__, _json_safe(cfg.echo()), _json_safe(results), warnings)
    for kind in cfg.plot:
        files[f"plot_{kind}.csv"] = plot_rows(report, kind)
    validate_report(report)
    return report, files


def write_outputs(out_dir, report: Report, files: dict) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        header, rows = files[name]
        written.append(write_csv(out / name, header, rows))
    path = out / "report.json"
    path.write_text(report.to_json())
    written.append(path)
    return written


def error_block(exc: BaseException, exit_code: int) -> str:
    messages = getattr(exc, "messages", None) or [str(exc)]
    err = {"type": type(exc).__name__, "exit_code": exit_code, "messages": messages}
    for attr in ("row", "column"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    return json.dumps({"error": err}, sort_keys=True)


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        report, files = run(cfg)
        write_outputs(cfg.out, report, files)
    except RVConesError as exc:
        print(error_block(exc, exc.exit_code), file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, ValueError) as exc:
        # shape problems in the input (e.g. hrv on a univariate sample) are data errors
        print(error_block(exc, 3), file=sys.stderr)
        return 3
    except (FloatingPointError, ArithmeticError) as exc:
        print(error_block(exc, 4), file=sys.stderr)
        return 4
    return 0


__all__ = ["RunConfig", "build_parser", "config_from_args", "main", "run", "write_outputs"]
