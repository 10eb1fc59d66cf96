"""Riesz 1-energy of the atomic natural measure and the eps-ball diagnostic."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BudgetExceeded
from .geometry import QuadratureSpec, integrate_theta
from .models import ModelId, ModelKind, _as_model, difference_words, natural_measure_atoms

MAX_CLASS_LEVEL = 8
# direct O(N^2) pair sums: 4**6 squares, 3**8 triangles
MAX_DIRECT_CELLS = 6561


@dataclass(frozen=True)
class EnergyResult:
    model: ModelId
    n: int
    energy: float
    per_scale_breakdown: dict  # k -> sum over pairs with floor(log4 1/|z - w|) = k

    @property
    def energy_over_n(self) -> float:
        return self.energy / self.n if self.n else math.nan

    @property
    def self_term(self) -> float:
        """Sum of squared masses, 1 / (number of atoms)."""
        return 1.0 / _as_model(self.model).cell_count(self.n)


def _check_direct(model: ModelId, n: int, max_cells: int):
    if model.cell_count(n) > max_cells:
        raise BudgetExceeded(f"direct pair sum over {model.cell_count(n)} atoms (cap {max_cells})")


def riesz_energy(model, n: int, *, method: str = "auto", max_cells: int = MAX_DIRECT_CELLS) -> EnergyResult:
    """Sum over ordered distinct atom pairs of m(z) m(w) / |z - w|.

    ``method`` is "classes" (four-corner only), "direct" or "auto".
    """
    model = _as_model(model)
    if method == "auto":
        method = "classes" if model.kind is ModelKind.FOUR_CORNER else "direct"
    if method == "classes":
        if model.kind is not ModelKind.FOUR_CORNER:
            raise ValueError("difference classes exist only for the four-corner model")
        if n > MAX_CLASS_LEVEL:
            raise BudgetExceeded(f"class energy is limited to n <= {MAX_CLASS_LEVEL}")
        D, M = difference_words(n)
        sums = kernels.riesz_classes(n, D, M) * 4.0 ** -n
        breakdown = {k - 1: float(v) for k, v in enumerate(sums) if v}
    elif method == "direct":
        _check_direct(model, n, max_cells)
        mu = natural_measure_atoms(model, n)
        sums = kernels.riesz_direct(mu.points, mu.masses, -1, n + 1)
        breakdown = {k - 1: float(v) for k, v in enumerate(sums) if v}
    else:
        raise ValueError(f"unknown method {method!r}")
    return EnergyResult(model, n, math.fsum(breakdown.values()), breakdown)


def scale_pair_counts(n: int) -> dict:
    """Ordered distinct four-corner pairs per distance scale k (exact integers)."""
    if n > MAX_CLASS_LEVEL:
        raise BudgetExceeded(f"class census is limited to n <= {MAX_CLASS_LEVEL}")
    D, M = difference_words(n)
    out: dict = {}
    for X, Y, C in kernels._class_grid(D, M, max(1, (1 << 21) // D.size)):
        r2 = X * X + Y * Y
        e = np.zeros(r2.shape, np.int64)
        while True:
            step = r2 > (np.int64(1) << (4 * e))
            if not step.any():
                break
            e += step
        ks, inv = np.unique(n - e, return_inverse=True)
        tot = np.zeros(ks.size, np.int64)
        np.add.at(tot, inv, C)
        for k, c in zip(ks.tolist(), tot.tolist()):
            out[k] = out.get(k, 0) + c
    return dict(sorted(out.items()))


# ------------------------------------------------------------ eps-ball average


def _angle_measure(r: np.ndarray, eps: float) -> np.ndarray:
    """Measure of {theta in [0, pi) : |r cos(theta - a)| <= eps}."""
    ratio = np.minimum(1.0, eps / np.where(r > 0, r, 1.0))
    return np.where(r <= eps, math.pi, 2.0 * np.arcsin(ratio))


def _pair_distances(model: ModelId, n: int, max_cells: int):
    """Yield (distance, weight) chunks over ordered distinct pairs, weight = m m'."""
    if model.kind is ModelKind.FOUR_CORNER and n <= MAX_CLASS_LEVEL:
        D, M = difference_words(n)
        h = 4.0 ** -n
        w = 16.0 ** -n
        for X, Y, C in kernels._class_grid(D, M, max(1, (1 << 21) // D.size)):
            yield h * np.hypot(X.astype(np.float64), Y.astype(np.float64)), w * C
        return
    _check_direct(model, n, max_cells)
    mu = natural_measure_atoms(model, n)
    P, m = mu.points, mu.masses
    chunk = max(1, (1 << 21) // len(m))
    for start in range(0, len(m), chunk):
        sl = slice(start, min(len(m), start + chunk))
        d = np.hypot(P[sl, 0, None] - P[None, :, 0], P[sl, 1, None] - P[None, :, 1])
        ww = m[sl, None] * m[None, :]
        own = np.arange(sl.start, sl.stop)
        keep = np.ones(d.shape, bool)
        keep[own - start, own] = False
        yield d[keep], ww[keep]


def ball_average(
    model,
    n: int,
    epsilon: float,
    spec: QuadratureSpec | None = None,
    max_cells: int = MAX_DIRECT_CELLS,
) -> float:
    """Integral over theta in [0, pi] of the projected measure's eps-ball mass
    averaged against itself (self-pairs included).

    Without ``spec`` each pair contributes m m' times the exact measure of the
    angles at which its projections lie within eps.  With ``spec`` the
    projected atoms are counted at quadrature nodes instead.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    model = _as_model(model)
    self_term = 1.0 / model.cell_count(n)
    if spec is None:
        parts = [math.fsum(w * _angle_measure(d, epsilon)) for d, w in _pair_distances(model, n, max_cells)]
        return math.pi * self_term + math.fsum(parts)

    _check_direct(model, n, max_cells)
    mu = natural_measure_atoms(model, n)
    P, m = mu.points, mu.masses

    def g(thetas):
        out = np.empty(len(thetas))
        for i, t in enumerate(np.atleast_1d(thetas)):
            p = np.sort(P[:, 0] * math.cos(t) + P[:, 1] * math.sin(t))
            # equal masses: count ordered pairs within eps
            inside = np.searchsorted(p, p + epsilon, side="right") - np.searchsorted(p, p - epsilon, side="left")
            out[i] = m[0] * m[0] * inside.sum()
        return out

    jumps = None
    if len(m) <= 1024:
        # the integrand is piecewise constant; jumps where |<z - w, e_theta>| = eps
        a, b = np.triu_indices(len(m), 1)
        dx, dy = P[a, 0] - P[b, 0], P[a, 1] - P[b, 1]
        r = np.hypot(dx, dy)
        far = r > epsilon
        alpha = np.arctan2(dy[far], dx[far])
        beta = np.arccos(epsilon / r[far])
        jumps = np.concatenate([alpha + beta, alpha - beta, alpha + math.pi - beta, alpha - math.pi + beta]) % math.pi
    return integrate_theta(g, 0.0, math.pi, spec, breakpoints=jumps, vectorized=True).value


def cauchy_chain(model, n: int, grid_size: int = 4096) -> tuple[float, float]:
    """(integral of 1/|E|, integral of second/first**2) on a midpoint grid.

    |E| * integral f**2 >= (integral f)**2 pointwise, so the first never
    exceeds the second.
    """
    from .buffon import median_grid
    from .projection import projection_stats

    stats = projection_stats(model, n, median_grid(grid_size))
    dt = math.pi / grid_size
    return math.fsum(1.0 / stats[:, 0]) * dt, math.fsum(stats[:, 2] / stats[:, 1] ** 2) * dt
