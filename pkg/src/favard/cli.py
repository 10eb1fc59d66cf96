"""Command-line front end.

Every flag can also be set through an environment variable named FAVARD_
plus the flag name in upper case with dashes turned into underscores
(FAVARD_TRIALS, FAVARD_N_RANGE, ...).  Flags given on the command line win.

Exit status: 0 success, 1 usage error (nothing written), 2 budget exceeded,
3 quadrature not converged (output is still written, rows are flagged).
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
import warnings

from . import __version__, _accel, buffon, energy, pairs, projection, report
from .errors import BudgetExceeded, FavardError, InsufficientData, NonConvergenceWarning
from .geometry import QuadratureSpec
from .models import ModelId, ModelKind, cell_layout

ENV_PREFIX = "FAVARD_"
COMMANDS = ("favard", "needle", "profile", "pairs", "energy", "median", "sierpinski", "random", "report")

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _n_range(text: str) -> list[int]:
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.|-|:)\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(a, b + 1))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="favard", description="Favard length lab for Cantor-type iterates.")
    p.add_argument("--version", action="version", version=f"favard {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", default="four_corner", help="four_corner | sierpinski | random")
    p.add_argument("--n", type=int, help="level")
    p.add_argument("--n-range", type=_n_range, help="inclusive level range a..b")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--nodes", type=int, default=QuadratureSpec.nodes_per_panel, help="Gauss nodes per panel")
    p.add_argument("--panels", type=int, default=QuadratureSpec.panel_count, help="initial panel count")
    p.add_argument("--tol", type=float, default=QuadratureSpec.tolerance, help="relative refinement tolerance")
    p.add_argument("--max-doublings", type=int, default=QuadratureSpec.max_doublings)
    p.add_argument("--c1", type=float, default=buffon.DEFAULT_C1)
    p.add_argument("--c2", type=float, default=buffon.DEFAULT_C2)
    p.add_argument("--slack", type=int, default=1)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
    p.add_argument("--grid", type=int, default=4096, help="direction grid size (median, profile)")
    p.add_argument("--seeds", type=int, help="seed count for random-model averages")
    p.add_argument("--samples", type=int, default=64, help="directions sampled by the pairs violation check")
    p.add_argument("--table", choices=("buckets", "overlaps", "violations"), default="buckets")
    p.add_argument("--dump-cells", metavar="PATH", help="profile: also write the cells as CSV")
    return p


def _env_args(parser: argparse.ArgumentParser, environ) -> list[str]:
    """Flags taken from FAVARD_* variables."""
    out = []
    for action in parser._actions:
        if not action.option_strings or action.dest in ("help", "version"):
            continue
        flag = max(action.option_strings, key=len)
        key = ENV_PREFIX + flag.lstrip("-").upper().replace("-", "_")
        if key in environ:
            out += [flag, environ[key]]
    return out


def parse_config(argv, environ=None):
    environ = os.environ if environ is None else environ
    parser = build_parser()
    args = parser.parse_args(argv)
    # environment values first so that explicit flags override them
    env = _env_args(parser, environ)
    if env:
        args = parser.parse_args([args.command] + env + [a for a in argv if a != args.command])
    if args.n is not None and args.n_range is not None:
        raise UsageError("--n and --n-range are mutually exclusive")
    if args.n is None and args.n_range is None:
        raise UsageError("one of --n or --n-range is required")
    try:
        model = ModelId.parse(args.model, args.seed)
        if args.command == "sierpinski":
            model = ModelId(ModelKind.SIERPINSKI)
        elif args.command == "random" and model.kind is not ModelKind.RANDOM:
            model = ModelId(ModelKind.RANDOM, args.seed)
        spec = QuadratureSpec(args.panels, args.nodes, args.tol, args.max_doublings)
        seeds = args.seeds if args.seeds is not None else (20 if args.command == "random" else 0)
        config = report.RunConfig(
            model=model,
            n_values=[args.n] if args.n is not None else args.n_range,
            seed=args.seed,
            spec=spec,
            trials=args.trials,
            c1=args.c1,
            c2=args.c2,
            slack=args.slack,
            grid=args.grid,
            seeds=seeds,
            threads=args.threads,
            out=args.out,
            fmt=args.fmt,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.samples < 1:
        raise UsageError("samples must be >= 1")
    if args.command == "random" and config.seeds < 1:
        raise UsageError("random needs --seeds >= 1")
    return args, config


# ------------------------------------------------------------------ commands


def _favard_rows(config):
    rows = []
    for n in config.n_values:
        fav = buffon.favard(config.model, n, config.spec)
        med = buffon.median_support(config.model, n, config.grid)
        rows.append({"model": str(config.model), "n": n, "favard": fav.value, "error": fav.error_estimate,
                     "median": med.median, "reciprocal_integral": med.reciprocal_integral,
                     "node_count": fav.node_count, "converged": fav.converged})
    return rows


def _needle_rows(config):
    rows = []
    for n in config.n_values:
        mc = buffon.buffon_estimate(config.model, n, config.trials, config.seed)
        rows.append({"model": str(config.model), "n": n, "trials": mc.trials, "hits": mc.hits,
                     "estimate": mc.estimate, "std_error": mc.std_error, "seed": mc.seed,
                     "favard_estimate": mc.favard_estimate, "favard_std_error": mc.favard_std_error})
    return rows


def _profile_rows(config, args):
    phis = buffon.median_grid(config.grid)
    rows = []
    for n in config.n_values:
        for r in projection.profile_rows(config.model, n, phis):
            rows.append({"n": n, **r})
    if args.dump_cells:
        cells = []
        for n in config.n_values:
            lay = cell_layout(config.model, n, projection.default_cap(config.model))
            cells += [{"level": n, "corner_x": float(x), "corner_y": float(y), "side": lay.side}
                      for x, y in zip(lay.ax, lay.ay)]
        _write(args.dump_cells, report.to_csv(cells, ["level", "corner_x", "corner_y", "side"]))
    return rows


def _pairs_rows(config, args):
    if config.model.kind is not ModelKind.FOUR_CORNER:
        raise UsageError("pairs works on the four-corner model only")
    rows = []
    for n in config.n_values:
        if args.table == "buckets":
            table = pairs.count_buckets(n)
            rows += [dict(r, flagged=(r["j"], r["k"]) in table.out_of_range()) for r in table.rows()]
        elif args.table == "overlaps":
            rows += pairs.total_overlap(n).rows()
        else:
            for j in range(0, int(math.floor(math.log(n, 4))) + 1 if n >= 1 else 0):
                rep = pairs.crucial_observation_check(n, j, config.c1, config.c2, args.samples,
                                                      config.seed, config.slack)
                rows += [v.row(n) for v in rep.violations]
    return rows


def _energy_rows(config):
    rows = []
    for n in config.n_values:
        e = energy.riesz_energy(config.model, n)
        row = {"model": str(config.model), "n": n, "energy": e.energy,
               "energy_over_n": e.energy / n if n else None}
        row.update({f"scale_{k}": v for k, v in e.per_scale_breakdown.items()})
        rows.append(row)
    return rows


def _median_rows(config):
    rows = []
    for n in config.n_values:
        m = buffon.median_support(config.model, n, config.grid)
        rows.append({"model": str(config.model), "n": n, "median": m.median,
                     "reciprocal_integral": m.reciprocal_integral, "chebyshev_bound": m.chebyshev_bound,
                     "grid": m.sample_count})
    return rows


def _sierpinski_rows(config):
    rows = []
    for n in config.n_values:
        fav = buffon.favard(config.model, n, config.spec)
        zeta = math.pi * fav.value
        rows.append({"model": str(config.model), "n": n, "favard": fav.value, "error": fav.error_estimate,
                     "zeta": zeta, "n_zeta": n * zeta, "converged": fav.converged})
    return rows


def _random_rows(config):
    return report.random_average_rows(config.n_values, config.seed, config.seeds, config.spec)


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fixed_columns(args):
    if args.command == "pairs":
        return {"buckets": ["n", "j", "k", "count", "bound", "ratio", "flagged"],
                "overlaps": ["n", "j", "k", "partial_sum"],
                "violations": ["theta", "square1", "square2", "j_expected", "j_actual"]}[args.table]
    return None


def execute(args, config) -> str:
    cmd = args.command
    if cmd == "report":
        payload = report.build_report(config)
        if config.fmt == "json":
            return report.to_json(payload)
        return report.to_csv(payload["tables"], report.TABLE_COLUMNS + ["converged"])
    rows = {
        "favard": lambda: _favard_rows(config),
        "needle": lambda: _needle_rows(config),
        "profile": lambda: _profile_rows(config, args),
        "pairs": lambda: _pairs_rows(config, args),
        "energy": lambda: _energy_rows(config),
        "median": lambda: _median_rows(config),
        "sierpinski": lambda: _sierpinski_rows(config),
        "random": lambda: _random_rows(config),
    }[cmd]()
    if config.fmt == "csv":
        return report.to_csv(rows, _fixed_columns(args) if not rows else None)
    return report.to_json({"command": cmd, "model": str(config.model), "rows": rows})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, config = parse_config(argv)
    except UsageError as exc:
        parser = build_parser()
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"favard: error: {exc}\n")
        return EXIT_USAGE
    _accel.set_threads(config.threads)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonConvergenceWarning)
            text = execute(args, config)
    except UsageError as exc:
        sys.stderr.write(f"favard: error: {exc}\n")
        return EXIT_USAGE
    except BudgetExceeded as exc:
        sys.stderr.write(f"favard: budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (InsufficientData, FavardError) as exc:
        sys.stderr.write(f"favard: {exc}\n")
        return EXIT_USAGE
    _write(config.out, text)
    nonconv = [w for w in caught if issubclass(w.category, NonConvergenceWarning)]
    for w in nonconv:
        sys.stderr.write(f"favard: warning: {w.message}\n")
    return EXIT_NONCONVERGED if nonconv else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
