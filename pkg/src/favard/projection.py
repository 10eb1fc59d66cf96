"""Projections of model cells onto lines through the origin.

Directions use the angle phi of the projection line: p(x, y) = x cos phi +
y sin phi, phi in [0, pi).  Projecting a set rotated counterclockwise by
theta onto the horizontal axis is the same as projecting the unrotated set
along phi = -theta (mod pi), so Favard integrals agree under phi <-> theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .geometry import Interval, QuadratureResult, QuadratureSpec, StepFunction, build_step, integrate_theta
from .models import ModelId, ModelKind, Square, Triangle, _as_model, cell_layout, difference_words

MAX_SQUARE_LEVEL = 12
MAX_TRIANGLE_LEVEL = 13
# kink-aligned panels are used up to this level (about 9**n difference classes)
KINK_MAX_LEVEL = 5


@dataclass(frozen=True)
class Direction:
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi) % math.pi)

    @classmethod
    def from_rotation(cls, theta: float) -> "Direction":
        return cls(-theta)

    @property
    def unit(self) -> tuple[float, float]:
        return (math.cos(self.phi), math.sin(self.phi))

    def project(self, x, y):
        c, s = self.unit
        return x * c + y * s


def _as_direction(d) -> Direction:
    return d if isinstance(d, Direction) else Direction(d)


def default_cap(model: ModelId) -> int:
    return 3 ** MAX_TRIANGLE_LEVEL if model.is_triangular else 4 ** MAX_SQUARE_LEVEL


def project_cell(cell, direction) -> Interval:
    """[min, max] of the direction functional over the cell's vertices."""
    direction = _as_direction(direction)
    if isinstance(cell, Square):
        verts = cell.vertices
    elif isinstance(cell, Triangle):
        verts = np.asarray(cell.vertices, dtype=np.float64)
    else:
        raise TypeError(f"not a cell: {cell!r}")
    p = direction.project(verts[:, 0], verts[:, 1])
    return Interval(float(p.min()), float(p.max()))


def cell_intervals(model, n: int, direction, max_cells: int | None = None) -> np.ndarray:
    """(N, 2) projection intervals of every level-n cell, vertex by vertex."""
    model = _as_model(model)
    direction = _as_direction(direction)
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))
    c, s = direction.unit
    lo = np.full(lay.count, np.inf)
    hi = np.full(lay.count, -np.inf)
    for vx, vy in lay.shape:
        p = (lay.ax + lay.side * vx) * c + (lay.ay + lay.side * vy) * s
        np.minimum(lo, p, out=lo)
        np.maximum(hi, p, out=hi)
    return np.column_stack([lo, hi])


@dataclass(frozen=True, eq=False)
class ProjectionProfile:
    direction: Direction
    multiplicity: StepFunction
    support_length: float
    first_moment: float
    second_moment: float


def profile(model, n: int, direction, max_cells: int | None = None) -> ProjectionProfile:
    """Exact multiplicity step function of the level-n model along a direction."""
    from .geometry import step_moment

    direction = _as_direction(direction)
    f = build_step(cell_intervals(model, n, direction, max_cells))
    return ProjectionProfile(direction, f, f.support_length, step_moment(f, 1), step_moment(f, 2))


# ------------------------------------------------------------- fast paths


def projection_stats(model, n: int, phis, max_cells: int | None = None, moments: bool = True) -> np.ndarray:
    """(P, 3) array of support length, first and second moment per direction."""
    model = _as_model(model)
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))
    return kernels.projection_stats(lay, np.asarray(phis, dtype=np.float64) % math.pi, moments)


def support_length(model, n: int, phis, max_cells: int | None = None) -> np.ndarray:
    return projection_stats(model, n, phis, max_cells, moments=False)[:, 0]


def lattice_support(model, n: int, a: int, b: int, max_cells: int | None = None) -> float:
    """Support length along a lattice direction, in exact integer arithmetic.

    Cells live on an integer lattice: squares at (X, Y) h, triangles at
    (P u, Q sqrt3 u) with u = 3**-n / 2.  The functional aX + bY (resp.
    aP + bQ) is integer valued; its union length is computed exactly and
    scaled once at the end, so e.g. (1, 0) gives the horizontal projection
    with a single rounding.
    """
    model = _as_model(model)
    if a == 0 and b == 0:
        raise ValueError("(a, b) must be non-zero")
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))
    if model.is_triangular:
        denom = 2 * 3 ** n
        P = np.rint(lay.ax * denom).astype(np.int64)
        Q = np.rint(lay.ay * denom / math.sqrt(3.0)).astype(np.int64)
        verts = np.array([[0, 0], [2, 0], [1, 1]], dtype=np.int64)
        norm = math.sqrt(a * a + b * b / 3.0)
    else:
        denom = 4 ** n
        P = np.rint(lay.ax * denom).astype(np.int64)
        Q = np.rint(lay.ay * denom).astype(np.int64)
        verts = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.int64)
        norm = math.hypot(a, b)
    span = verts[:, 0] * a + verts[:, 1] * b
    W = int(span.max() - span.min())
    left = np.sort(P * a + Q * b)
    units = int(np.minimum(np.diff(left), W).sum()) + W
    exact = Fraction(units, denom)
    return float(exact) if norm == 1.0 else float(exact) / norm


def kink_angles(model, n: int) -> np.ndarray | None:
    """Directions in (0, pi) where the four-corner support or second moment
    can fail to be smooth.

    Two level-n squares with corner difference (X, Y) * 4**-n have
    projection overlap max(0, w - |delta|), w = h(|cos|+|sin|), delta =
    h(X cos + Y sin); it kinks where w = +-delta, delta = 0, or at pi/2.
    Between consecutive kinks both integrands are a cos + b sin.
    Returns None for models without a difference-class structure.
    """
    model = _as_model(model)
    if model.kind is not ModelKind.FOUR_CORNER:
        return None
    D, _ = difference_words(n)
    X = np.repeat(D, D.size).astype(np.float64)
    Y = np.tile(D, D.size).astype(np.float64)
    # (X, Y) and (-X, -Y) share their kinks
    keep = (X > 0) | ((X == 0) & (Y >= 0))
    X, Y = X[keep], Y[keep]
    roots = [np.array([0.5 * math.pi])]
    for a, b, sc in ((0.0, 0.5 * math.pi, 1.0), (0.5 * math.pi, math.pi, -1.0)):
        for A, B in ((sc - X, 1.0 - Y), (sc + X, 1.0 + Y), (X, Y)):
            r = kernels._roots_np(A, B, a, b)
            roots.append(r[r > a])
    return np.unique(np.concatenate(roots))


def _kinks_for(model, n, kinks):
    if kinks is False:
        return None
    if kinks is None and n > KINK_MAX_LEVEL:
        return None
    return kink_angles(model, n)


def second_moment_theta(
    model,
    n: int,
    spec: QuadratureSpec = QuadratureSpec(),
    theta_range: tuple[float, float] = (0.0, math.pi),
    kinks: bool | None = None,
    max_cells: int | None = None,
) -> QuadratureResult:
    """Integral over directions of the integral of f_n^2 (the step-function route).

    ``kinks=None`` aligns panels with :func:`kink_angles` when n is small
    enough for that to be cheap; True/False force it on or off.
    """
    model = _as_model(model)
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))

    def g(phis):
        return kernels.projection_stats(lay, np.asarray(phis) % math.pi, True)[:, 2]

    a, b = theta_range
    return integrate_theta(g, a, b, spec, breakpoints=_kinks_for(model, n, kinks), vectorized=True)


def profile_rows(model, n: int, phis, max_cells: int | None = None) -> list[dict]:
    stats = projection_stats(model, n, phis, max_cells)
    return [
        {"theta": float(p), "support_length": float(r[0]), "first_moment": float(r[1]), "second_moment": float(r[2])}
        for p, r in zip(np.asarray(phis, dtype=np.float64), stats)
    ]
