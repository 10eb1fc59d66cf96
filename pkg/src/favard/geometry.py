"""Interval unions, step-function algebra and composite Gauss-Legendre."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import NonConvergenceWarning

# endpoints this many ulps (of the largest magnitude) apart are one breakpoint;
# computed projections of abutting cells miss each other by a few roundings
SNAP_ULPS = 16.0


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def _as_bounds(intervals) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(intervals, np.ndarray):
        arr = np.asarray(intervals, dtype=np.float64).reshape(-1, 2)
    else:
        items = list(intervals)
        if not items:
            return np.empty(0), np.empty(0)
        arr = np.array(
            [(iv.lo, iv.hi) if isinstance(iv, Interval) else tuple(iv) for iv in items],
            dtype=np.float64,
        )
    lo, hi = arr[:, 0], arr[:, 1]
    if np.any(lo > hi):
        raise ValueError("interval with lo > hi")
    return lo, hi


def union_length(intervals) -> float:
    """Lebesgue measure of a finite union of closed intervals.

    Accepts a list of :class:`Interval`, ``(lo, hi)`` pairs or an ``(N, 2)``
    array.  Sort by left endpoint, merge, sum the merged lengths exactly.
    """
    lo, hi = _as_bounds(intervals)
    if lo.size == 0:
        return 0.0
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    # a new component starts where the left end lies strictly past everything so far
    starts = np.ones(lo.size, dtype=bool)
    starts[1:] = lo[1:] > reach[:-1]
    first = np.flatnonzero(starts)
    last = np.append(first[1:] - 1, lo.size - 1)
    return math.fsum(reach[last] - lo[first])


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant non-negative integer function.

    ``values[i]`` holds on the open gap ``(breakpoints[i], breakpoints[i+1])``;
    the function vanishes outside ``[breakpoints[0], breakpoints[-1]]``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if bp.size == 0:
            if vals.size:
                raise ValueError("values without breakpoints")
            return
        if vals.size != bp.size - 1:
            raise ValueError("need len(values) == len(breakpoints) - 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(vals < 0):
            raise ValueError("values must be non-negative")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def support_length(self) -> float:
        if self.values.size == 0:
            return 0.0
        return math.fsum(self.widths[self.values > 0])

    @property
    def max_value(self) -> int:
        return int(self.values.max()) if self.values.size else 0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.values.size == 0:
            return np.zeros(x.shape, dtype=np.int64)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.zeros(x.shape, dtype=np.int64)
        out[inside] = self.values[idx[inside]]
        return out


def build_step(intervals, snap: bool = True) -> StepFunction:
    """Multiplicity function x -> #{intervals containing x}.

    With ``snap`` endpoints within SNAP_ULPS ulps of each other are merged,
    so rounding cannot open slivers between abutting intervals.
    """
    lo, hi = _as_bounds(intervals)
    if lo.size == 0:
        return StepFunction(np.empty(0), np.empty(0, dtype=np.int64))
    pts = np.concatenate([lo, hi])
    deltas = np.concatenate([np.ones(lo.size, np.int64), -np.ones(hi.size, np.int64)])
    order = np.argsort(pts, kind="stable")
    pts, deltas = pts[order], deltas[order]
    tol = SNAP_ULPS * np.finfo(np.float64).eps * max(abs(pts[0]), abs(pts[-1])) if snap else 0.0
    first = np.flatnonzero(np.concatenate([[True], np.diff(pts) > tol]))
    bp = pts[first]
    net = np.add.reduceat(deltas, first)
    values = np.cumsum(net)[:-1]
    return StepFunction(bp, values)


def step_moment(f: StepFunction, p: int) -> float:
    """Exact ``sum(value**p * width)`` with a correctly rounded sum."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    if f.values.size == 0:
        return 0.0
    vals = f.values.astype(np.float64)
    return math.fsum(vals ** p * f.widths)


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    panel_count: int = 64
    nodes_per_panel: int = 8
    tolerance: float = 1e-5
    max_doublings: int = 10

    def __post_init__(self):
        if self.panel_count < 1:
            raise ValueError("panel_count must be >= 1")
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be >= 2")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_doublings < 1:
            raise ValueError("max_doublings must be >= 1")


class QuadratureResult(NamedTuple):
    value: float
    error: float
    panels: int
    converged: bool


def gauss_legendre_sum(g, edges: np.ndarray, nodes_per_panel: int, vectorized: bool) -> float:
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    if vectorized:
        vals = np.asarray(g(pts), dtype=np.float64)
    else:
        vals = np.array([g(float(t)) for t in pts], dtype=np.float64)
    contrib = (half[:, None] * w[None, :]).ravel() * vals
    return math.fsum(contrib)


def integrate_theta(
    g: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
    *,
    breakpoints: Iterable[float] | None = None,
    vectorized: bool = False,
) -> QuadratureResult:
    """Composite Gauss-Legendre on [a, b] with panel doubling.

    Panels start as a uniform grid of ``spec.panel_count`` cells, merged with
    any ``breakpoints`` (kinks of g) inside (a, b).  Each round halves every
    panel; the error estimate is the change between successive rounds.
    """
    if b < a:
        raise ValueError("need a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, True)
    edges = np.linspace(a, b, spec.panel_count + 1)
    if breakpoints is not None:
        bp = np.asarray(list(breakpoints) if not isinstance(breakpoints, np.ndarray) else breakpoints,
                        dtype=np.float64)
        bp = bp[(bp > a) & (bp < b)]
        edges = np.unique(np.concatenate([edges, bp]))
    prev = gauss_legendre_sum(g, edges, spec.nodes_per_panel, vectorized)
    err = math.inf
    for _ in range(spec.max_doublings):
        mids = 0.5 * (edges[1:] + edges[:-1])
        edges = np.sort(np.concatenate([edges, mids]))
        cur = gauss_legendre_sum(g, edges, spec.nodes_per_panel, vectorized)
        err = abs(cur - prev)
        prev = cur
        if err <= spec.tolerance * abs(cur):
            return QuadratureResult(cur, err, edges.size - 1, True)
    warnings.warn(
        f"quadrature on [{a:.6g}, {b:.6g}] not converged after "
        f"{spec.max_doublings} doublings (err {err:.3g})",
        NonConvergenceWarning,
        stacklevel=2,
    )
    return QuadratureResult(prev, err, edges.size - 1, False)
