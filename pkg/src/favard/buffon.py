"""Favard lengths, Buffon-needle Monte Carlo, sector integrals and medians."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels, rng
from .errors import EmptySector
from .geometry import QuadratureSpec, integrate_theta
from .models import ModelId, ModelKind, _as_model, cell_layout, random_model
from .pairs import AXIS_PHI
from .projection import Direction, _as_direction, _kinks_for, default_cap

SQRT2 = math.sqrt(2.0)
# needles are centred on the unit square's centre, offsets within +-sqrt2
WINDOW_CENTRE = (0.5, 0.5)
WINDOW_HALF = SQRT2

DEFAULT_C1 = 0.25
DEFAULT_C2 = 4.0


@dataclass(frozen=True)
class NeedleLine:
    """The line {z : p_phi(z) = offset}."""

    phi: Direction
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "phi", _as_direction(self.phi))


@dataclass(frozen=True)
class FavardResult:
    model: ModelId
    n: int
    value: float
    error_estimate: float
    node_count: int
    converged: bool = True

    @property
    def integral(self) -> float:
        """Integral of the support length over [0, pi] (pi * value)."""
        return math.pi * self.value


@dataclass(frozen=True)
class MonteCarloResult:
    model: ModelId
    n: int
    trials: int
    hits: int
    seed: int

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def std_error(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def favard_estimate(self) -> float:
        return 2.0 * WINDOW_HALF * self.estimate

    @property
    def favard_std_error(self) -> float:
        return 2.0 * WINDOW_HALF * self.std_error


@dataclass(frozen=True)
class MedianResult:
    model: ModelId
    n: int
    median: float
    sample_count: int
    reciprocal_integral: float

    @property
    def chebyshev_bound(self) -> float:
        """Lower bound (pi/2) / reciprocal_integral that the median must clear."""
        return 0.5 * math.pi / self.reciprocal_integral


class SectorResult(NamedTuple):
    value: float
    error: float
    theta_lo: float
    theta_hi: float
    beyond_valid_range: bool
    converged: bool


def _symmetry(model: ModelId) -> tuple[float, float]:
    """(range upper end, multiplicity) of a fundamental domain of phi -> support."""
    if model.kind is ModelKind.FOUR_CORNER:
        # dihedral symmetry of the square: even and pi/2-periodic
        return 0.25 * math.pi, 4.0
    if model.kind is ModelKind.SIERPINSKI:
        # mirror in the altitude x = 1/2 sends phi to pi - phi
        return 0.5 * math.pi, 2.0
    return math.pi, 1.0


def favard(
    model,
    n: int,
    spec: QuadratureSpec = QuadratureSpec(),
    *,
    kinks: bool | None = None,
    use_symmetry: bool = True,
    max_cells: int | None = None,
) -> FavardResult:
    """(1/pi) * integral over [0, pi] of the projection length of the level-n model."""
    model = _as_model(model)
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))
    upper, mult = _symmetry(model) if use_symmetry else (math.pi, 1.0)

    def g(phis):
        return kernels.projection_stats(lay, phis, False)[:, 0]

    q = integrate_theta(g, 0.0, upper, spec, breakpoints=_kinks_for(model, n, kinks), vectorized=True)
    nodes = q.panels * spec.nodes_per_panel
    return FavardResult(model, n, mult * q.value / math.pi, mult * q.error / math.pi, nodes, q.converged)


def sector_bounds(j: int, c1: float = DEFAULT_C1, c2: float = DEFAULT_C2) -> tuple[float, float]:
    """Angles from the 0X axis spanned by J_j = [c1 4^-j, c2 4^-j], clipped to [0, pi/2].

    Angles past pi/2 would approach the axis again from the other side, so
    the sector is measured as angular distance from the axis.
    """
    if c1 > c2:
        raise EmptySector(f"c1 = {c1} exceeds c2 = {c2}")
    lo = min(max(c1 * 4.0 ** -j, 0.0), 0.5 * math.pi)
    hi = min(max(c2 * 4.0 ** -j, 0.0), 0.5 * math.pi)
    if lo == hi and c1 < c2:
        raise EmptySector(f"sector j={j} lies outside [0, pi/2]")
    return lo, hi


def sector_valid(n: int, j: int, slack: float = 1.0) -> bool:
    return n >= 1 and j <= math.log(n, 4) + slack


def sector_integral(
    model,
    n: int,
    j: int,
    c1: float = DEFAULT_C1,
    c2: float = DEFAULT_C2,
    spec: QuadratureSpec = QuadratureSpec(),
    max_cells: int | None = None,
) -> SectorResult:
    """Integral of the support length over directions at angle J_j from the 0X axis."""
    model = _as_model(model)
    lo, hi = sector_bounds(j, c1, c2)
    flagged = not sector_valid(n, j)
    if lo == hi:
        return SectorResult(0.0, 0.0, lo, hi, flagged, True)
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))

    def g(thetas):
        return kernels.projection_stats(lay, (AXIS_PHI + np.asarray(thetas)) % math.pi, False)[:, 0]

    q = integrate_theta(g, lo, hi, spec, vectorized=True)
    return SectorResult(q.value, q.error, lo, hi, flagged, q.converged)


def needle_hits(model, n: int, phis, offsets) -> np.ndarray:
    model = _as_model(model)
    tree = kernels.TreeSpec(model, n)
    return kernels.needle_hits(tree, np.asarray(phis, dtype=np.float64) % math.pi, offsets)


def needle_hit(model, n: int, line: NeedleLine) -> bool:
    """Does the line meet a level-n cell?  Digit-tree descent; closed cells."""
    return bool(needle_hits(model, n, [line.phi.phi], [line.offset])[0])


def buffon_estimate(model, n: int, trials: int, seed: int = 0) -> MonteCarloResult:
    """Throw ``trials`` infinite needles: phi ~ U[0, pi), offset ~ U(centre +- sqrt2)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    model = _as_model(model)
    tree = kernels.TreeSpec(model, n)
    mc_seed = rng.substream(seed, rng.TAG_NEEDLE)
    hits = kernels.buffon_hits(tree, mc_seed, int(trials), WINDOW_CENTRE, WINDOW_HALF)
    return MonteCarloResult(model, n, int(trials), hits, rng.as_seed(seed))


def median_grid(grid_size: int) -> np.ndarray:
    return (np.arange(grid_size) + 0.5) * (math.pi / grid_size)


def median_support(model, n: int, grid_size: int = 4096, max_cells: int | None = None) -> MedianResult:
    """Median of the support length over a midpoint grid on [0, pi), and the
    midpoint-rule integral of its reciprocal."""
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    model = _as_model(model)
    lay = cell_layout(model, n, max_cells if max_cells is not None else default_cap(model))
    sup = kernels.projection_stats(lay, median_grid(grid_size), False)[:, 0]
    recip = math.fsum(1.0 / sup) * (math.pi / grid_size)
    return MedianResult(model, n, float(np.median(sup)), grid_size, recip)


def random_favard_average(n: int, seeds, spec: QuadratureSpec = QuadratureSpec()) -> dict:
    """Favard length of the random model averaged over seeds."""
    vals = np.array([favard(random_model(s), n, spec).value for s in seeds])
    return {
        "n": n,
        "seeds": len(vals),
        "mean": float(vals.mean()),
        "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
        "min": float(vals.min()),
        "max": float(vals.max()),
    }
