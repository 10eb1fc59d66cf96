"""Per-n tables, fitted constants and CSV/JSON emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

from . import buffon, energy, pairs
from .errors import BudgetExceeded, InsufficientData
from .geometry import QuadratureSpec
from .models import ModelId, ModelKind, _as_model

SCHEMA_ID = "favard-report/1"
SCHEMA_FILE = "report-v1.json"
LOG_NOTE = "c_lower = min over n >= 2 of n * favard(n) / ln(n), natural logarithm"

TABLE_COLUMNS = [
    "n", "favard", "favard_error", "zeta", "n_favard", "median", "reciprocal_integral",
    "total_overlap", "energy", "bucket_max_ratio",
]


@dataclass
class RunConfig:
    model: ModelId = field(default_factory=ModelId)
    n_values: list = field(default_factory=lambda: [0])
    seed: int = 0
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    trials: int = 100_000
    c1: float = buffon.DEFAULT_C1
    c2: float = buffon.DEFAULT_C2
    slack: int = 1
    grid: int = 4096
    seeds: int = 0
    threads: int | None = None
    out: str = "-"
    fmt: str = "json"

    def __post_init__(self):
        if not self.n_values or any(n < 0 for n in self.n_values):
            raise ValueError("levels must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")
        if self.slack < 0:
            raise ValueError("slack must be >= 0")
        if self.grid < 16:
            raise ValueError("grid must be >= 16")
        if self.seeds < 0:
            raise ValueError("seeds must be >= 0")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    def describe(self) -> dict:
        """Config block for reports.  The thread count is left out on purpose:
        outputs do not depend on it."""
        return {
            "model": str(self.model),
            "n_values": list(self.n_values),
            "seed": self.seed,
            "quadrature": asdict(self.spec),
            "trials": self.trials,
            "c1": self.c1,
            "c2": self.c2,
            "slack": self.slack,
            "grid": self.grid,
        }


def _maybe(fn):
    try:
        return fn()
    except BudgetExceeded:
        return None


def table_row(model: ModelId, n: int, spec: QuadratureSpec, grid: int = 4096) -> dict:
    fav = buffon.favard(model, n, spec)
    med = buffon.median_support(model, n, grid)
    four = model.kind is ModelKind.FOUR_CORNER
    return {
        "n": n,
        "favard": fav.value,
        "favard_error": fav.error_estimate,
        "zeta": math.pi * fav.value if model.kind is ModelKind.SIERPINSKI else None,
        "n_favard": n * fav.value,
        "median": med.median,
        "reciprocal_integral": med.reciprocal_integral,
        "total_overlap": _maybe(lambda: pairs.total_overlap(n).total) if four else None,
        "energy": _maybe(lambda: energy.riesz_energy(model, n).energy),
        "bucket_max_ratio": _maybe(lambda: pairs.count_buckets(n).max_ratio) if four and n >= 1 else None,
        "converged": fav.converged,
    }


def fit_constants(tables: list[dict]) -> dict:
    """Min/max extractions over rows with n >= 2 (at least two such rows)."""
    rows = [r for r in tables if r["n"] >= 2]
    if len({r["n"] for r in rows}) < 2:
        raise InsufficientData("need at least two levels n >= 2")

    def over(key, fn, agg):
        vals = [fn(r) for r in rows if r.get(key) is not None]
        return agg(vals) if vals else None

    return {
        "c_lower": over("favard", lambda r: r["n"] * r["favard"] / math.log(r["n"]), min),
        "C_pairsum": over("total_overlap", lambda r: r["total_overlap"] / r["n"], max),
        "C_energy": over("energy", lambda r: r["energy"] / r["n"], max),
        "C_bucket": over("bucket_max_ratio", lambda r: r["bucket_max_ratio"], max),
    }


def trend_series(tables: list[dict]) -> dict:
    rows = sorted(tables, key=lambda r: r["n"])
    return {"n": [r["n"] for r in rows], "n_favard": [r["n"] * r["favard"] for r in rows]}


def random_average_rows(n_values, seed: int, count: int, spec: QuadratureSpec) -> list[dict]:
    seeds = [seed + i for i in range(count)]
    out = []
    for n in n_values:
        avg = buffon.random_favard_average(n, seeds, spec)
        avg["n_mean"] = n * avg["mean"]
        out.append(avg)
    return out


def build_report(config: RunConfig) -> dict:
    model = _as_model(config.model)
    tables = [table_row(model, n, config.spec, config.grid) for n in config.n_values]
    try:
        fits = fit_constants(tables)
    except InsufficientData:
        fits = None
    report = {
        "schema": SCHEMA_ID,
        "model": str(model),
        "log_base": LOG_NOTE,
        "config": config.describe(),
        "tables": tables,
        "fits": fits,
        "trend": trend_series(tables),
    }
    if config.seeds:
        report["random_average"] = random_average_rows(
            [n for n in config.n_values if n <= 6], config.seed, config.seeds, config.spec)
    return report


# ------------------------------------------------------------------ emission


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def to_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("favard").joinpath("schemas", SCHEMA_FILE).read_text())
