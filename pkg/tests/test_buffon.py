import math

import numpy as np
import pytest

from favard.buffon import (
    NeedleLine,
    buffon_estimate,
    favard,
    median_grid,
    median_support,
    needle_hit,
    needle_hits,
    random_favard_average,
    sector_bounds,
    sector_integral,
    sector_valid,
)
from favard.errors import EmptySector
from favard.geometry import QuadratureSpec
from favard.models import FOUR_CORNER, SIERPINSKI, random_model

from oracles import (
    four_corner_cells,
    midpoint_integral,
    needle_brute,
    sierpinski_vertices,
    square_vertices,
    support_from_vertices,
)

FOUR_OVER_PI = 4 / math.pi


def test_favard_level_zero():
    r = favard(FOUR_CORNER, 0)
    assert r.value == pytest.approx(FOUR_OVER_PI, abs=1e-12)
    assert r.integral == pytest.approx(4.0, abs=1e-11)
    assert r.converged


def test_favard_level_one_against_dense_grid():
    corners, side = four_corner_cells(1)
    verts = square_vertices(corners, side)
    grid = midpoint_integral(lambda t: support_from_vertices(verts, t), 0.0, math.pi, 100_000) / math.pi
    assert favard(FOUR_CORNER, 1).value == pytest.approx(grid, abs=1e-5)


def test_sierpinski_level_one_against_dense_grid():
    verts = sierpinski_vertices(1)
    grid = midpoint_integral(lambda t: support_from_vertices(verts, t), 0.0, math.pi, 20_000) / math.pi
    assert favard(SIERPINSKI, 1).value == pytest.approx(grid, abs=1e-5)


def test_symmetry_reduction_is_exact():
    spec = QuadratureSpec(panel_count=32, nodes_per_panel=8, tolerance=1e-9)
    for model in (FOUR_CORNER, SIERPINSKI):
        a = favard(model, 2, spec).value
        b = favard(model, 2, spec, use_symmetry=False).value
        assert a == pytest.approx(b, rel=1e-7)


@pytest.mark.slow
def test_favard_is_monotone():
    vals = [favard(FOUR_CORNER, n).value for n in range(0, 9)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    # n * Fav(K_n) stays away from zero
    assert min(n * v for n, v in enumerate(vals) if n) > 0.5


def test_random_model_favard_bounded_by_level_zero():
    r = favard(random_model(3), 3)
    assert 0 < r.value < FOUR_OVER_PI
    avg = random_favard_average(2, [0, 1, 2])
    assert avg["seeds"] == 3 and avg["min"] <= avg["mean"] <= avg["max"]


def test_needle_examples():
    assert needle_hit(FOUR_CORNER, 1, NeedleLine(math.pi / 2, 0.125))
    assert not needle_hit(FOUR_CORNER, 1, NeedleLine(math.pi / 2, 0.5))
    assert needle_hit(FOUR_CORNER, 1, NeedleLine(0.0, 0.0))
    # corners of the closed squares count
    assert needle_hit(FOUR_CORNER, 1, NeedleLine(0.0, 0.25))
    assert not needle_hit(FOUR_CORNER, 1, NeedleLine(0.0, 0.26))


@pytest.mark.parametrize("model", [FOUR_CORNER, SIERPINSKI, random_model(17)])
@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_needle_descent_matches_brute_force(model, n):
    from favard.models import cell_layout

    lay = cell_layout(model, n)
    verts = np.stack([np.column_stack([lay.ax + lay.side * vx, lay.ay + lay.side * vy]) for vx, vy in lay.shape],
                     axis=1)
    rs = np.random.default_rng(n)
    phis = rs.uniform(0, math.pi, 2000)
    offs = rs.uniform(-0.9, 1.6, 2000)
    got = needle_hits(model, n, phis, offs)
    want = [needle_brute(verts, p, t) for p, t in zip(phis, offs)]
    assert got.tolist() == want


def test_buffon_is_deterministic():
    a = buffon_estimate(FOUR_CORNER, 3, 50_000, seed=12)
    b = buffon_estimate(FOUR_CORNER, 3, 50_000, seed=12)
    c = buffon_estimate(FOUR_CORNER, 3, 50_000, seed=13)
    assert a.hits == b.hits and a.hits != c.hits
    with pytest.raises(ValueError):
        buffon_estimate(FOUR_CORNER, 1, 0)


def test_buffon_level_zero():
    mc = buffon_estimate(FOUR_CORNER, 0, 10 ** 6, seed=1)
    assert abs(mc.favard_estimate - FOUR_OVER_PI) <= 3 * mc.favard_std_error


def test_median_level_zero_closed_forms():
    m = median_support(FOUR_CORNER, 0)
    assert m.median == pytest.approx(math.sqrt(2) * math.sin(3 * math.pi / 8), abs=2e-3)
    assert m.reciprocal_integral == pytest.approx(2 * math.sqrt(2) * math.log(1 + math.sqrt(2)), abs=2e-3)
    assert m.sample_count == 4096


@pytest.mark.parametrize("model", [FOUR_CORNER, SIERPINSKI, random_model(2)])
def test_chebyshev_consistency(model):
    for n in range(0, 6):
        m = median_support(model, n, 1024)
        assert m.median >= m.chebyshev_bound


def test_median_grid():
    g = median_grid(4)
    np.testing.assert_allclose(g, [math.pi / 8, 3 * math.pi / 8, 5 * math.pi / 8, 7 * math.pi / 8])
    with pytest.raises(ValueError):
        median_support(FOUR_CORNER, 0, 8)


def test_sector_bounds():
    assert sector_bounds(0) == (0.25, 0.5 * math.pi)
    assert sector_bounds(1) == (1 / 16, 1.0)
    assert sector_bounds(2, 0.5, 0.5) == (0.5 / 16, 0.5 / 16)
    with pytest.raises(EmptySector):
        sector_bounds(0, 2.0, 1.0)
    with pytest.raises(EmptySector):
        sector_bounds(0, 2.0, 3.0)


def test_sector_zero_width():
    r = sector_integral(FOUR_CORNER, 4, 1, 0.5, 0.5)
    assert r.value == 0.0 and r.theta_lo == r.theta_hi


def test_sector_validity_flag():
    assert sector_valid(4, 1) and sector_valid(4, 2)
    assert not sector_valid(4, 3)
    assert sector_integral(FOUR_CORNER, 2, 4).beyond_valid_range


def test_sector_values_positive_and_sum_bounded():
    n = 4
    fav = favard(FOUR_CORNER, n)
    spec = QuadratureSpec(panel_count=16, nodes_per_panel=8, tolerance=1e-6)
    # c2/c1 = 4 makes J_0, J_1, ... disjoint
    vals = [sector_integral(FOUR_CORNER, n, j, 1.0, 4.0, spec) for j in range(0, 2)]
    assert all(v.value > 0 for v in vals)
    assert all(v.value >= 0.5 / n for v in vals)
    assert math.fsum(v.value for v in vals) <= math.pi * fav.value * (1 + 1e-6)
    assert sector_integral(FOUR_CORNER, n, 0, 0.25, 4.0, spec).value > 0
