"""Four-corner, Sierpinski and random four-corner Cantor iterates.

Every level-n model is a union of translates of one cell (a square of side
4**-n or an upward equilateral triangle of side 3**-n).  ``cell_layout``
returns the translates as anchor arrays; the kernels only ever need those plus
the unit-cell shape.

Anchors are built by the recurrence ``child = parent + offset * child_side``,
the same arithmetic the needle descent uses, so both agree bit for bit.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import rng
from .errors import BudgetExceeded, WrongModel

SQRT3 = math.sqrt(3.0)

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
UNIT_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * SQRT3]])

# child offsets in units of the child side, in digit order
FOUR_CORNER_OFFSETS = np.array([[0.0, 0.0], [0.0, 3.0], [3.0, 0.0], [3.0, 3.0]])
SIERPINSKI_OFFSETS = np.array([[0.0, 0.0], [1.0, SQRT3], [2.0, 0.0]])

MAX_LEVEL = 26


class ModelKind(str, enum.Enum):
    FOUR_CORNER = "four_corner"
    SIERPINSKI = "sierpinski"
    RANDOM = "random"

    @property
    def code(self) -> int:
        return {"four_corner": 0, "sierpinski": 1, "random": 2}[self.value]


_ALIASES = {
    "four_corner": ModelKind.FOUR_CORNER,
    "fourcorner": ModelKind.FOUR_CORNER,
    "four-corner": ModelKind.FOUR_CORNER,
    "k": ModelKind.FOUR_CORNER,
    "sierpinski": ModelKind.SIERPINSKI,
    "s": ModelKind.SIERPINSKI,
    "random": ModelKind.RANDOM,
}


@dataclass(frozen=True)
class ModelId:
    kind: ModelKind = ModelKind.FOUR_CORNER
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        # the seed only matters for the random model
        object.__setattr__(self, "seed", rng.as_seed(self.seed) if self.kind is ModelKind.RANDOM else 0)

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> "ModelId":
        try:
            kind = _ALIASES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown model {name!r}") from None
        return cls(kind, seed)

    @property
    def is_triangular(self) -> bool:
        return self.kind is ModelKind.SIERPINSKI

    @property
    def branching(self) -> int:
        return 3 if self.is_triangular else 4

    def cell_count(self, n: int) -> int:
        return self.branching ** n

    def __str__(self):
        if self.kind is ModelKind.RANDOM:
            return f"random[{self.seed}]"
        return self.kind.value


FOUR_CORNER = ModelId(ModelKind.FOUR_CORNER)
SIERPINSKI = ModelId(ModelKind.SIERPINSKI)


def random_model(seed: int) -> ModelId:
    return ModelId(ModelKind.RANDOM, seed)


def _as_model(model) -> ModelId:
    if isinstance(model, ModelId):
        return model
    if isinstance(model, ModelKind):
        return ModelId(model)
    return ModelId.parse(str(model))


# ---------------------------------------------------------------- cell types


@dataclass(frozen=True)
class Square:
    corner: tuple[float, float]
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("side must be positive")

    @property
    def vertices(self) -> np.ndarray:
        return np.asarray(self.corner) + self.side * UNIT_SQUARE

    @property
    def center(self) -> tuple[float, float]:
        h = 0.5 * self.side
        return (self.corner[0] + h, self.corner[1] + h)

    def contains_square(self, other: "Square") -> bool:
        return (
            self.corner[0] <= other.corner[0]
            and self.corner[1] <= other.corner[1]
            and other.corner[0] + other.side <= self.corner[0] + self.side
            and other.corner[1] + other.side <= self.corner[1] + self.side
        )


@dataclass(frozen=True)
class Triangle:
    vertices: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]

    @property
    def side(self) -> float:
        (x0, y0), (x1, y1), _ = self.vertices
        return math.hypot(x1 - x0, y1 - y0)

    @property
    def centroid(self) -> tuple[float, float]:
        xs, ys = zip(*self.vertices)
        return (sum(xs) / 3.0, sum(ys) / 3.0)

    def is_equilateral(self, tol: float = 1e-12) -> bool:
        v = np.asarray(self.vertices)
        sides = [np.linalg.norm(v[i] - v[(i + 1) % 3]) for i in range(3)]
        return max(sides) - min(sides) <= tol * max(sides)


@dataclass(frozen=True)
class SquareAddress:
    """Digit words (a_1..a_n), (b_1..b_n) over {0, 3} of a four-corner square."""

    a_digits: tuple[int, ...]
    b_digits: tuple[int, ...]

    def __post_init__(self):
        a, b = tuple(self.a_digits), tuple(self.b_digits)
        if len(a) != len(b):
            raise ValueError("digit words must have the same length")
        if any(d not in (0, 3) for d in a + b):
            raise ValueError("four-corner digits are 0 or 3")
        object.__setattr__(self, "a_digits", a)
        object.__setattr__(self, "b_digits", b)

    @property
    def n(self) -> int:
        return len(self.a_digits)

    @property
    def corner(self) -> tuple[float, float]:
        x = sum(d * 4.0 ** -(j + 1) for j, d in enumerate(self.a_digits))
        y = sum(d * 4.0 ** -(j + 1) for j, d in enumerate(self.b_digits))
        return (x, y)

    @property
    def side(self) -> float:
        return 4.0 ** -self.n

    @property
    def integer_corner(self) -> tuple[int, int]:
        """Corner in units of 4**-n (exact)."""
        n = self.n
        x = sum(d * 4 ** (n - j - 1) for j, d in enumerate(self.a_digits))
        y = sum(d * 4 ** (n - j - 1) for j, d in enumerate(self.b_digits))
        return (x, y)

    def square(self) -> Square:
        return Square(self.corner, self.side)


def square_addresses(n: int) -> Iterator[SquareAddress]:
    """All 4**n four-corner addresses in lexicographic (a_1, b_1, a_2, ...) order."""
    for pairs in itertools.product(((0, 0), (0, 3), (3, 0), (3, 3)), repeat=n):
        yield SquareAddress(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


# ------------------------------------------------------------------ layouts


class CellLayout(NamedTuple):
    ax: np.ndarray  # anchor x (lower-left corner / lower-left vertex)
    ay: np.ndarray
    side: float
    shape: np.ndarray  # unit cell vertices, (k, 2)

    @property
    def count(self) -> int:
        return self.ax.size


def _random_children(seed: int, level: int, parent_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Child offsets (units of child side) for every quadrant of every parent.

    Quadrant q = 2*qx + qy of a parent holds a 2x2 block of the parent's 4x4
    grid; one of its four cells r = 2*rx + ry is picked by the draw keyed on
    (level, 4*parent_id + q).  Returns offsets shaped (parents, 4).
    """
    ids = parent_ids.astype(np.uint64)[:, None] * np.uint64(4) + np.arange(4, dtype=np.uint64)[None, :]
    keys = (np.uint64(level) << np.uint64(56)) | ids
    r = (rng.draw(seed, keys) >> np.uint64(62)).astype(np.int64)
    q = np.arange(4)[None, :]
    ox = 2 * (q >> 1) + (r >> 1)
    oy = 2 * (q & 1) + (r & 1)
    return ox.astype(np.float64), oy.astype(np.float64)


def random_choice_key(level: int, child_id: int) -> int:
    return (level << 56) | child_id


def cell_layout(model, n: int, max_cells: int | None = None) -> CellLayout:
    model = _as_model(model)
    if not 0 <= n <= MAX_LEVEL:
        raise ValueError(f"level must be in [0, {MAX_LEVEL}]")
    count = model.cell_count(n)
    if max_cells is not None and count > max_cells:
        raise BudgetExceeded(f"{model} level {n} has {count} cells (cap {max_cells})")
    ax = np.zeros(1)
    ay = np.zeros(1)
    ids = np.zeros(1, dtype=np.int64)
    if model.is_triangular:
        base = SIERPINSKI_OFFSETS
        ratio = 1.0 / 3.0
    else:
        base = FOUR_CORNER_OFFSETS
        ratio = 0.25
    side = 1.0
    for level in range(1, n + 1):
        side = ratio ** level
        if model.kind is ModelKind.RANDOM:
            ox, oy = _random_children(model.seed, level, ids)
        else:
            ox = np.broadcast_to(base[:, 0], (ax.size, base.shape[0]))
            oy = np.broadcast_to(base[:, 1], (ax.size, base.shape[0]))
        ax = (ax[:, None] + ox * side).ravel()
        ay = (ay[:, None] + oy * side).ravel()
        ids = (ids[:, None] * 4 + np.arange(4)[None, :]).ravel() if model.kind is ModelKind.RANDOM else ids
    shape = UNIT_TRIANGLE if model.is_triangular else UNIT_SQUARE
    return CellLayout(ax, ay, side, shape)


def enumerate_squares(model, n: int) -> Iterator[Square]:
    """Lazily yield the 4**n squares of a four-corner or random iterate."""
    model = _as_model(model)
    if model.is_triangular:
        raise WrongModel("the Sierpinski model is made of triangles; use enumerate_triangles")
    if model.kind is ModelKind.FOUR_CORNER:
        for addr in square_addresses(n):
            yield addr.square()
        return

    def walk(x, y, level, node_id):
        if level == n:
            yield Square((x, y), 0.25 ** n)
            return
        child_level = level + 1
        side = 0.25 ** child_level
        ox, oy = _random_children(model.seed, child_level, np.array([node_id]))
        for q in range(4):
            yield from walk(x + ox[0, q] * side, y + oy[0, q] * side, child_level, 4 * node_id + q)

    yield from walk(0.0, 0.0, 0, 0)


def enumerate_triangles(n: int) -> Iterator[Triangle]:
    """Lazily yield the 3**n triangles of the Sierpinski iterate."""

    def walk(x, y, level):
        if level == n:
            s = (1.0 / 3.0) ** n
            yield Triangle(((x, y), (x + s, y), (x + 0.5 * s, y + 0.5 * SQRT3 * s)))
            return
        side = (1.0 / 3.0) ** (level + 1)
        for ox, oy in SIERPINSKI_OFFSETS:
            yield from walk(x + ox * side, y + oy * side, level + 1)

    yield from walk(0.0, 0.0, 0)


# ------------------------------------------------------- difference classes


@dataclass(frozen=True)
class DifferenceClass:
    delta: tuple[float, float]
    ordered_pair_count: int
    integer_delta: tuple[int, int] = (0, 0)


def difference_words(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis corner differences in units of 4**-n and their multiplicities.

    D = sum d_j 4**(n-j) with d_j in {-3, 0, 3}; the number of ordered digit
    pairs producing D is prod m(d_j) with m(0) = 2, m(+-3) = 1.
    """
    diffs = np.zeros(1, dtype=np.int64)
    counts = np.ones(1, dtype=np.int64)
    step_d = np.array([-3, 0, 3], dtype=np.int64)
    step_m = np.array([1, 2, 1], dtype=np.int64)
    for _ in range(n):
        diffs = (diffs[:, None] * 4 + step_d[None, :]).ravel()
        counts = (counts[:, None] * step_m[None, :]).ravel()
    return diffs, counts


def difference_classes(model, n: int) -> Iterator[DifferenceClass]:
    """Translation classes of ordered square pairs, keyed by corner difference."""
    model = _as_model(model)
    if model.kind is not ModelKind.FOUR_CORNER:
        raise WrongModel("difference classes exist only for the four-corner model")
    diffs, counts = difference_words(n)
    h = 0.25 ** n
    for i in range(diffs.size):
        for k in range(diffs.size):
            yield DifferenceClass(
                (float(diffs[i]) * h, float(diffs[k]) * h),
                int(counts[i] * counts[k]),
                (int(diffs[i]), int(diffs[k])),
            )


# ------------------------------------------------------------ atom measures


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    points: np.ndarray  # (N, 2)
    masses: np.ndarray  # (N,)

    def __post_init__(self):
        if np.any(self.masses <= 0):
            raise ValueError("masses must be positive")
        if abs(math.fsum(self.masses) - 1.0) > 1e-12:
            raise ValueError("masses must sum to 1")

    def __iter__(self):
        for p, m in zip(self.points, self.masses):
            yield (float(p[0]), float(p[1])), float(m)

    def __len__(self):
        return self.masses.size


def natural_measure_atoms(model, n: int, max_cells: int | None = None) -> DiscreteMeasure:
    """Equal-mass atoms at the cell centres (triangle centroids)."""
    model = _as_model(model)
    lay = cell_layout(model, n, max_cells)
    centre = lay.shape.mean(axis=0) * lay.side
    pts = np.column_stack([lay.ax + centre[0], lay.ay + centre[1]])
    masses = np.full(lay.count, 1.0 / lay.count)
    return DiscreteMeasure(pts, masses)
