import itertools
import math
from collections import Counter

import numpy as np
import pytest

from favard import rng
from favard.errors import BudgetExceeded, WrongModel
from favard.models import (
    FOUR_CORNER,
    SIERPINSKI,
    ModelId,
    ModelKind,
    Square,
    SquareAddress,
    cell_layout,
    difference_classes,
    enumerate_squares,
    enumerate_triangles,
    natural_measure_atoms,
    random_model,
)

from oracles import four_corner_cells, sierpinski_vertices


def test_level_zero_and_one_squares():
    (sq,) = list(enumerate_squares(FOUR_CORNER, 0))
    assert sq.corner == (0.0, 0.0) and sq.side == 1.0
    sqs = list(enumerate_squares(FOUR_CORNER, 1))
    assert {s.corner for s in sqs} == {(0.0, 0.0), (0.0, 0.75), (0.75, 0.0), (0.75, 0.75)}
    assert all(s.side == 0.25 for s in sqs)


@pytest.mark.parametrize("n", range(0, 5))
def test_squares_match_digit_oracle(n):
    corners, side = four_corner_cells(n)
    got = sorted(s.corner for s in enumerate_squares(FOUR_CORNER, n))
    assert got == sorted(corners)
    lay = cell_layout(FOUR_CORNER, n)
    assert sorted(zip(lay.ax.tolist(), lay.ay.tolist())) == sorted(corners)
    assert lay.side == side


@pytest.mark.parametrize("n", range(0, 5))
def test_squares_are_disjoint_with_total_area(n):
    sqs = list(enumerate_squares(FOUR_CORNER, n))
    assert len(sqs) == 4 ** n
    assert math.fsum(s.side ** 2 for s in sqs) == pytest.approx(4.0 ** -n, abs=1e-15)
    # integer corners on the 4**-n grid differ by at least one side in x or y
    P = np.array([[round(s.corner[0] * 4 ** n), round(s.corner[1] * 4 ** n)] for s in sqs])
    d = np.abs(P[:, None, :] - P[None, :, :]).max(axis=2)
    np.fill_diagonal(d, 1)
    assert d.min() >= 1


@pytest.mark.parametrize("model", [FOUR_CORNER, random_model(11)])
def test_children_lie_in_parents(model):
    for n in range(0, 4):
        parents = list(enumerate_squares(model, n))
        kids = list(enumerate_squares(model, n + 1))
        assert len(kids) == 4 * len(parents)
        for i, k in enumerate(kids):
            # children are yielded parent by parent
            assert parents[i // 4].contains_square(k)


def test_random_model_is_deterministic():
    a = [s.corner for s in enumerate_squares(random_model(5), 2)]
    b = [s.corner for s in enumerate_squares(random_model(5), 2)]
    assert a == b
    others = {tuple(s.corner for s in enumerate_squares(random_model(k), 2)) for k in range(6, 16)}
    assert len(others | {tuple(a)}) > 1


def test_random_model_one_child_per_quadrant():
    parent = Square((0.0, 0.0), 1.0)
    kids = list(enumerate_squares(random_model(3), 1))
    quads = Counter((int(k.corner[0] >= 0.5), int(k.corner[1] >= 0.5)) for k in kids)
    assert quads == Counter({(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1})
    assert all(parent.contains_square(k) for k in kids)


def test_random_stream_matches_layout():
    m = random_model(42)
    lazy = sorted(s.corner for s in enumerate_squares(m, 4))
    lay = cell_layout(m, 4)
    assert lazy == sorted(zip(lay.ax.tolist(), lay.ay.tolist()))


def test_splitmix_reference_values():
    # first outputs of splitmix64 seeded with 0 (published reference sequence)
    assert rng.draw_int(0, 0) == 0xE220A8397B1DCDAF
    assert rng.draw_int(0, 1) == 0x6E789E6AA1B965F4
    assert rng.draw_int(0, 2) == 0x06C45D188009454F
    assert int(rng.draw(0, [2])[0]) == 0x06C45D188009454F
    assert rng.substream(7, rng.TAG_MODEL) != rng.substream(7, rng.TAG_NEEDLE)


def test_triangles_level_zero_and_one():
    (t,) = list(enumerate_triangles(0))
    np.testing.assert_allclose(t.vertices, [(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)], atol=1e-15)
    tris = list(enumerate_triangles(1))
    bases = sorted((min(v[0] for v in tr.vertices), max(v[0] for v in tr.vertices)) for tr in tris)
    np.testing.assert_allclose(bases, [(0, 1 / 3), (1 / 3, 2 / 3), (2 / 3, 1)], atol=1e-15)
    assert all(tr.is_equilateral() for tr in tris)


@pytest.mark.parametrize("n", range(0, 5))
def test_triangles_match_scaling_oracle(n):
    want = sierpinski_vertices(n)
    got = np.array([tr.vertices for tr in enumerate_triangles(n)])
    key = lambda a: np.lexsort((a[:, 0, 1], a[:, 0, 0]))  # noqa: E731
    np.testing.assert_allclose(got[key(got)], want[key(want)], atol=1e-14)


def test_triangle_count():
    assert sum(1 for _ in enumerate_triangles(5)) == 243


def test_wrong_model():
    with pytest.raises(WrongModel):
        next(enumerate_squares(SIERPINSKI, 1))
    with pytest.raises(WrongModel):
        next(difference_classes(SIERPINSKI, 1))


def test_model_parsing():
    assert ModelId.parse("fourcorner") == FOUR_CORNER
    assert ModelId.parse("Sierpinski").kind is ModelKind.SIERPINSKI
    assert str(random_model(9)) == "random[9]"
    with pytest.raises(ValueError):
        ModelId.parse("koch")


def test_layout_budget():
    with pytest.raises(BudgetExceeded):
        cell_layout(FOUR_CORNER, 6, max_cells=1000)


def test_address_validation():
    with pytest.raises(ValueError):
        SquareAddress((0, 1), (0, 0))
    with pytest.raises(ValueError):
        SquareAddress((0,), (0, 3))
    a = SquareAddress((3, 0), (0, 3))
    assert a.corner == (0.75, 0.1875) and a.integer_corner == (12, 3)


def test_difference_class_examples():
    cls = {c.delta: c.ordered_pair_count for c in difference_classes(FOUR_CORNER, 1)}
    assert len(cls) == 9
    assert cls[(0.0, 0.0)] == 4
    assert cls[(0.75, 0.0)] == 2
    assert sum(cls.values()) == 16


@pytest.mark.parametrize("n", range(0, 5))
def test_difference_classes_match_brute_force(n):
    corners, _ = four_corner_cells(n)
    P = [(round(x * 4 ** n), round(y * 4 ** n)) for x, y in corners]
    brute = Counter((a[0] - b[0], a[1] - b[1]) for a, b in itertools.product(P, P))
    cls = {c.integer_delta: c.ordered_pair_count for c in difference_classes(FOUR_CORNER, n)}
    assert cls == dict(brute)


def test_atoms_examples():
    mu = natural_measure_atoms(FOUR_CORNER, 1)
    pts = sorted(p for p, _ in mu)
    assert pts == [(0.125, 0.125), (0.125, 0.875), (0.875, 0.125), (0.875, 0.875)]
    assert all(m == 0.25 for _, m in mu)
    (p, m), = list(natural_measure_atoms(SIERPINSKI, 0))
    assert p == pytest.approx((0.5, math.sqrt(3) / 6), abs=1e-15) and m == 1.0


@pytest.mark.parametrize("model", [FOUR_CORNER, SIERPINSKI, random_model(1)])
@pytest.mark.parametrize("n", [0, 2, 5])
def test_atom_mass_is_one(model, n):
    mu = natural_measure_atoms(model, n)
    assert math.fsum(mu.masses) == pytest.approx(1.0, abs=1e-12)
    assert len(mu) == model.cell_count(n)
