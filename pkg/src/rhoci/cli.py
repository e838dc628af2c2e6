"""Command line: ``rhoci {ci,simulate,figure,density}``.

Exit codes are 0 on success, 1 on a runtime or numeric failure and 2 on a
usage error (bad flags or a malformed input file). Every file written gets a
``<file>.manifest`` of ``key=value`` lines recording the resolved
configuration, seed, version and run time.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .core import ALL_METHODS, DomainError, MethodId
from .exact import exact_density
from .harness import SimConfig, run_grid, to_csv
from .methods import NEEDS_RAW_DATA, compute_all
from .montecarlo import MCConfig
from .distributions import RngStream
from .summary import stats_from_r, suff_stats

SEED_ENV = "RHO_CI_SEED"
FIGURE_RHO = tuple(round(0.1 * i, 1) for i in range(10))


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# parsing helpers


def _floats(text: str, what: str, count: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not vals or (count is not None and len(vals) != count):
        raise UsageError(f"{what}: expected {count or 'some'} values, got {text!r}")
    return vals


def _ints(text: str, what: str) -> tuple[int, ...]:
    vals = _floats(text, what)
    if any(v != int(v) for v in vals):
        raise UsageError(f"{what}: expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _methods(text: str | None) -> tuple[MethodId, ...]:
    if not text:
        return ALL_METHODS
    try:
        return tuple(MethodId.parse(t) for t in text.split(",") if t.strip())
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return args.seed


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_pairs(path) -> np.ndarray:
    """Two-column numeric CSV; a non-numeric first row is taken as a header."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not any(cells):
                continue
            if not rows and lineno == 1 and not all(_is_number(c) for c in cells):
                continue
            if len(cells) != 2:
                raise InputError(f"{path}:{lineno}: expected 2 columns, got {len(cells)}")
            try:
                rows.append((float(cells[0]), float(cells[1])))
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    if len(rows) < 3:
        raise InputError(f"{path}: need at least 3 data rows, got {len(rows)}")
    return np.array(rows)


def write_manifest(out: Path, command: str, config: dict, seed: int, started: float) -> Path:
    path = Path(str(out) + ".manifest")
    lines = [f"command={command}", f"version={__version__}", f"seed={seed}"]
    for k, v in config.items():
        if isinstance(v, (tuple, list)):
            v = ",".join(str(x) for x in v)
        lines.append(f"{k}={v}")
    lines.append(f"duration_s={time.time() - started:.3f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _emit(text: str, out, command, config, seed, started):
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    write_manifest(out, command, config, seed, started)


# --------------------------------------------------------------------------
# commands


def cmd_ci(args) -> int:
    started = time.time()
    seed = _seed(args)
    methods = _methods(args.methods)
    level = args.level
    if not 0 < level < 1:
        raise UsageError(f"--level must lie in (0, 1), got {level}")
    if (args.input is None) == (args.r is None):
        raise UsageError("give either a data file or --r with --n")
    if args.r is not None:
        if args.n is None:
            raise UsageError("--r needs --n")
        if not -1.0 < args.r < 1.0 or args.n < 3:
            raise UsageError("--r must lie in (-1, 1) and --n must be at least 3")
        stats, raw = stats_from_r(args.r, args.n), False
    else:
        stats, raw = suff_stats(read_pairs(args.input)), True

    cfg = MCConfig(args.inner_m, RngStream(seed))
    runnable = [m for m in methods if raw or m not in NEEDS_RAW_DATA]
    results = compute_all(stats, 1.0 - level, runnable, cfg)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "lower", "upper", "clamped_lower", "clamped_upper", "note"])
    for m in methods:
        if m not in results:
            w.writerow([m.value, "", "", "", "", "requires raw data (variance ratio b); skipped"])
            continue
        res = results[m]
        if isinstance(res, Exception):
            w.writerow([m.value, "", "", "", "", f"{type(res).__name__}: {res}"])
        else:
            w.writerow([m.value, f"{res.lower:.6f}", f"{res.upper:.6f}",
                        int(res.clamped_lower), int(res.clamped_upper), ""])
    config = {"input": args.input or "", "r": args.r if args.r is not None else "",
              "n": stats.n, "level": level, "methods": [m.value for m in methods],
              "inner_m": args.inner_m}
    _emit(buf.getvalue(), args.out, "ci", config, seed, started)
    return 0


def _sim_config(args, **over) -> SimConfig:
    kw = dict(
        dist=args.dist,
        mu=_floats(args.mu, "--mu", 2),
        sigma=_floats(args.sigma, "--sigma", 2),
        df=args.df,
        reps=args.reps,
        level=args.level,
        methods=_methods(args.methods),
        inner_m=args.inner_m,
        seed=_seed(args),
        expensive_reps=args.expensive_reps,
        full_reps=args.full_reps,
        failures_as_misses=args.failures_as_misses,
        threads=args.threads,
    )
    kw.update(over)
    try:
        return SimConfig(**kw)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _config_dict(cfg: SimConfig) -> dict:
    d = asdict(cfg)
    d["methods"] = [m.value for m in cfg.methods]
    return d


def cmd_simulate(args) -> int:
    started = time.time()
    cfg = _sim_config(
        args,
        rho_grid=_floats(args.rho_grid, "--rho-grid"),
        n_grid=_ints(args.n_grid, "--n-grid"),
    )
    text = to_csv(run_grid(cfg))
    _emit(text, args.out, "simulate", _config_dict(cfg), cfg.seed, started)
    return 0


def cmd_figure(args) -> int:
    started = time.time()
    ns = _ints(args.n, "--n")
    cfg = _sim_config(args, rho_grid=FIGURE_RHO, n_grid=ns)
    results = run_grid(cfg)
    prefix = Path(args.out)
    for n in ns:
        cov = io.StringIO()
        lng = io.StringIO()
        wc = csv.writer(cov, lineterminator="\n")
        wl = csv.writer(lng, lineterminator="\n")
        wc.writerow(["rho", "method", "coverage"])
        wl.writerow(["rho", "method", "mean_length"])
        for r in results:
            if r.n != n:
                continue
            wc.writerow([f"{r.rho:g}", r.method.value, f"{r.coverage:.6f}"])
            wl.writerow([f"{r.rho:g}", r.method.value, f"{r.mean_length:.6f}"])
        conf = dict(_config_dict(cfg), n_grid=[n])
        _emit(cov.getvalue(), f"{prefix}_n{n}_coverage.csv", "figure", conf, cfg.seed, started)
        _emit(lng.getvalue(), f"{prefix}_n{n}_length.csv", "figure", conf, cfg.seed, started)
    return 0


def cmd_density(args) -> int:
    started = time.time()
    if args.n < 4 or not -1.0 < args.rho < 1.0 or args.grid_points < 2:
        raise UsageError("density needs --n >= 4, |--rho| < 1 and --grid-points >= 2")
    r = np.linspace(-1.0, 1.0, args.grid_points)
    f = exact_density(r, args.n, args.rho)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "density"])
    for ri, fi in zip(r, f):
        w.writerow([f"{ri:.6f}", f"{fi:.10g}"])
    config = {"n": args.n, "rho": args.rho, "grid_points": args.grid_points}
    _emit(buf.getvalue(), args.out, "density", config, 0, started)
    return 0


# --------------------------------------------------------------------------
# argument parser


def _add_sim_flags(p, with_grids: bool):
    p.add_argument("--dist", choices=("normal", "t", "lognormal"), default="normal")
    p.add_argument("--mu", default="0,0", help="comma pair (default 0,0)")
    p.add_argument("--sigma", default="1,1", help="comma pair (default 1,1)")
    p.add_argument("--df", type=float, default=5.0, help="t degrees of freedom")
    if with_grids:
        p.add_argument("--rho-grid", default="0,0.6")
        p.add_argument("--n-grid", default="3,5,10,25")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--methods", help="comma list of method names (default: all 17)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inner-m", type=int, default=10_000, help="draws per Monte Carlo interval")
    p.add_argument("--expensive-reps", type=int, default=2_000,
                   help="replicates for Exact and the likelihood-ratio methods")
    p.add_argument("--full-reps", action="store_true", help="give every method --reps replicates")
    p.add_argument("--failures-as-misses", action="store_true")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rhoci", description="Confidence intervals for a correlation.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ci", help="intervals for one data set or for (r, n)")
    p.add_argument("input", nargs="?", help="CSV with two numeric columns")
    p.add_argument("--r", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--methods")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inner-m", type=int, default=10_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("simulate", help="coverage and expected length over a grid")
    _add_sim_flags(p, with_grids=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure", help="per-n coverage and length curves over rho = 0, 0.1, ..., 0.9")
    _add_sim_flags(p, with_grids=False)
    p.add_argument("--n", default="5,10,15,20")
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("density", help="density curve of the sample correlation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=2001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rhoci: error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"rhoci: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"rhoci: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
