"""The 0X/0Y frame of the four-corner set and (j, k) pair bookkeeping.

Projected onto the line at angle arctan(1/2) the level-n squares tile
[0, L], L = 3/sqrt5, and inherit a 4-adic interval structure.  All
classification below is done in exact integer arithmetic: with corner
differences (X, Y) in units h = 4**-n,

    ds = (2X + Y) h / sqrt5,      dy = (-X + 2Y) h / sqrt5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels, rng
from .errors import BudgetExceeded, DegeneratePair
from .geometry import QuadratureSpec, integrate_theta
from .models import FOUR_CORNER, DifferenceClass, SquareAddress, Square, cell_layout, difference_words

SQRT5 = math.sqrt(5.0)
AXIS_PHI = math.atan(0.5)
AXIS_L = 3.0 / SQRT5

MAX_BUCKET_LEVEL = 8
MAX_OVERLAP_LEVEL = 7
MAX_EXHAUSTIVE_LEVEL = 6


@dataclass(frozen=True)
class AxisFrame:
    phi_star: float = AXIS_PHI
    L: float = AXIS_L
    u: tuple[float, float] = (2.0 / SQRT5, 1.0 / SQRT5)
    u_perp: tuple[float, float] = (-1.0 / SQRT5, 2.0 / SQRT5)

    def s(self, x, y):
        return (2.0 * x + y) / SQRT5

    def y(self, x, y):
        return (-x + 2.0 * y) / SQRT5


FRAME = AxisFrame()


@dataclass(frozen=True)
class AxisPoint:
    s: float
    y: float
    sigma: tuple[int, ...]
    # lower-left corner in units of 4**-n, kept for exact classification
    corner: tuple[int, int] = field(default=(0, 0), compare=False)

    @property
    def n(self) -> int:
        return len(self.sigma)


def axis_coordinates(address: SquareAddress) -> AxisPoint:
    cx, cy = address.square().center
    sigma = tuple((2 * a + b) // 3 for a, b in zip(address.a_digits, address.b_digits))
    return AxisPoint(FRAME.s(cx, cy), FRAME.y(cx, cy), sigma, address.integer_corner)


def _common_prefix(w1, w2) -> int:
    m = 0
    for a, b in zip(w1, w2):
        if a != b:
            break
        m += 1
    return m


def four_adic_distance(p1: AxisPoint, p2: AxisPoint) -> float:
    """L * 4**-m, m = common prefix length of the two sigma words."""
    if p1.n != p2.n:
        raise ValueError("points come from different levels")
    return AXIS_L * 4.0 ** -_common_prefix(p1.sigma, p2.sigma)


@dataclass(frozen=True)
class PairBucket:
    j: int
    k: int


def classify_pair(p1: AxisPoint, p2: AxisPoint) -> PairBucket:
    """(j, k) with j = max(0, floor log4 |dy|/|ds|), k = floor log4 1/|ds| - j."""
    if p1.sigma == p2.sigma:
        raise DegeneratePair("a square cannot be paired with itself")
    X = p1.corner[0] - p2.corner[0]
    Y = p1.corner[1] - p2.corner[1]
    j, k = kernels.bucket_of_np(p1.n, X, Y)
    return PairBucket(int(j), int(k))


def classify_pair_rational(q1: SquareAddress, q2: SquareAddress) -> PairBucket:
    """Same floor rule, evaluated from the two centres with exact fractions.

    Independent of the integer difference-class route; used as an oracle.
    """
    if q1 == q2:
        raise DegeneratePair("a square cannot be paired with itself")
    n = q1.n
    h = Fraction(1, 4 ** n)

    def centre(q):
        x = sum(Fraction(d, 4 ** (i + 1)) for i, d in enumerate(q.a_digits)) + h / 2
        y = sum(Fraction(d, 4 ** (i + 1)) for i, d in enumerate(q.b_digits)) + h / 2
        return x, y

    (x1, y1), (x2, y2) = centre(q1), centre(q2)
    # sqrt5 * ds and sqrt5 * dy
    ds = abs(2 * (x1 - x2) + (y1 - y2))
    dy = abs(-(x1 - x2) + 2 * (y1 - y2))
    j = 0
    while 4 ** (j + 1) * ds <= dy:
        j += 1
    # floor log4 (1/|ds|) = largest m with 16**m * (sqrt5 ds)**2 <= 5
    m = 0
    if ds * ds <= 5:
        while Fraction(16) ** (m + 1) * ds * ds <= 5:
            m += 1
    else:
        while Fraction(16) ** m * ds * ds > 5:
            m -= 1
    return PairBucket(j, m - j)


# -------------------------------------------------------------- bucket counts


@dataclass(frozen=True)
class BucketTable:
    n: int
    counts: dict
    bound_ratio: dict
    degenerate: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def max_ratio(self) -> float:
        return max(self.bound_ratio.values()) if self.bound_ratio else 0.0

    def out_of_range(self) -> list[tuple[int, int]]:
        """Occupied buckets outside 0 <= j <= n, 0 <= k + j <= n + 1."""
        return [(j, k) for (j, k) in self.counts if not (0 <= j <= self.n and 0 <= k + j <= self.n + 1)]

    def rows(self) -> list[dict]:
        return [
            {"n": self.n, "j": j, "k": k, "count": c,
             "bound": 4.0 ** (2 * self.n - k - 2 * j), "ratio": self.bound_ratio[(j, k)]}
            for (j, k), c in sorted(self.counts.items())
        ]


def _check_level(n: int, cap: int, what: str):
    if n < 0:
        raise ValueError("level must be >= 0")
    if n > cap:
        raise BudgetExceeded(f"{what} is limited to n <= {cap} (got {n})")


def _table_dict(table: np.ndarray, n: int) -> dict:
    _, _, koff = kernels.table_shape(n)
    js, ks = np.nonzero(table)
    return {(int(j), int(k) - koff): table[j, k] for j, k in zip(js, ks)}


def count_buckets(n: int, max_level: int = MAX_BUCKET_LEVEL) -> BucketTable:
    """A_{j,k} for all ordered distinct pairs, via difference classes."""
    _check_level(n, max_level, "bucket counting")
    D, M = difference_words(n)
    table, bad = kernels.bucket_table(n, D, M)
    counts = {key: int(v) for key, v in _table_dict(table, n).items()}
    ratio = {(j, k): c / 4.0 ** (2 * n - k - 2 * j) for (j, k), c in counts.items()}
    return BucketTable(n, counts, ratio, int(bad))


def count_buckets_bruteforce(n: int) -> dict:
    """All 16**n ordered pairs classified one at a time (oracle, small n)."""
    _check_level(n, 4, "brute-force bucket counting")
    addrs = [a for a in _addresses(n)]
    counts: dict = {}
    for q1 in addrs:
        for q2 in addrs:
            if q1 == q2:
                continue
            b = classify_pair_rational(q1, q2)
            counts[(b.j, b.k)] = counts.get((b.j, b.k), 0) + 1
    return counts


def _addresses(n):
    from .models import square_addresses

    return square_addresses(n)


# ------------------------------------------------------------ overlap integrals


def _as_delta(delta, n: int) -> tuple[float, float]:
    """Corner difference in units of 4**-n."""
    h = 4.0 ** -n
    if isinstance(delta, DifferenceClass):
        return float(delta.integer_delta[0]), float(delta.integer_delta[1])
    if isinstance(delta, tuple) and len(delta) == 2 and all(isinstance(q, Square) for q in delta):
        q1, q2 = delta
        if not (math.isclose(q1.side, h) and math.isclose(q2.side, h)):
            raise ValueError("both squares must have side 4**-n")
        return (q1.corner[0] - q2.corner[0]) / h, (q1.corner[1] - q2.corner[1]) / h
    X, Y = delta
    return float(X), float(Y)


def pair_overlap(delta, n: int, spec: QuadratureSpec | None = None) -> float:
    """Integral over [0, pi] of the overlap length of the projections of two
    level-n squares.

    ``delta`` is a :class:`DifferenceClass`, a pair of :class:`Square`, or an
    integer corner difference (X, Y) in units of 4**-n.  Without ``spec`` the
    closed form is used; with one, composite Gauss-Legendre on kink-aligned
    panels.
    """
    X, Y = _as_delta(delta, n)
    h = 4.0 ** -n
    if spec is None:
        return h * kernels.overlap_unit(X, Y)

    def g(phi):
        c, s = np.abs(np.cos(phi)), np.abs(np.sin(phi))
        return np.maximum(0.0, c + s - np.abs(X * np.cos(phi) + Y * np.sin(phi)))

    kinks = [0.5 * math.pi]
    for a, b, sc in ((0.0, 0.5 * math.pi, 1.0), (0.5 * math.pi, math.pi, -1.0)):
        for A, B in ((sc - X, 1.0 - Y), (sc + X, 1.0 + Y), (X, Y)):
            kinks.extend(kernels._roots_np(np.array([A]), np.array([B]), a, b).tolist())
    return h * integrate_theta(g, 0.0, math.pi, spec, breakpoints=kinks, vectorized=True).value


@dataclass(frozen=True)
class OverlapTotal:
    n: int
    total: float
    diagonal: float
    partial: dict  # (j, k) -> sum of p_P over ordered distinct pairs in the bucket

    def per_j(self) -> dict:
        out: dict = {}
        for (j, _), v in self.partial.items():
            out[j] = out.get(j, 0.0) + v
        return {j: v for j, v in sorted(out.items())}

    def rows(self) -> list[dict]:
        return [{"n": self.n, "j": j, "k": k, "partial_sum": v} for (j, k), v in sorted(self.partial.items())]


def total_overlap(n: int, max_level: int = MAX_OVERLAP_LEVEL) -> OverlapTotal:
    """Sum of p_P over all ordered pairs (Q, Q'), with (Q, Q) pairs kept apart."""
    _check_level(n, max_level, "total overlap")
    D, M = difference_words(n)
    h = 4.0 ** -n
    table = kernels.overlap_table(n, D, M) * h
    partial = _table_dict(table, n)
    # each (Q, Q) pair contributes 4 h; there are 4**n of them
    diagonal = 4.0
    total = math.fsum(partial.values()) + diagonal
    return OverlapTotal(n, total, diagonal, {k: float(v) for k, v in partial.items()})


def overlap_decay_constant(n: int) -> float:
    """max over distinct classes of p_P / (4**-2n / |dy|)."""
    _check_level(n, MAX_EXHAUSTIVE_LEVEL, "overlap decay check")
    D, _ = difference_words(n)
    X = np.repeat(D, D.size)
    Y = np.tile(D, D.size)
    keep = (X != 0) | (Y != 0)
    X, Y = X[keep].astype(np.float64), Y[keep].astype(np.float64)
    # p_P |dy| / h**2 = overlap_unit * |T| / sqrt5
    return float(np.max(kernels.overlap_unit_np(X, Y) * np.abs(-X + 2 * Y) / SQRT5))


# ------------------------------------------------------- structural invariants


def integer_corners(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Four-corner square corners in units of 4**-n, in layout order."""
    lay = cell_layout(FOUR_CORNER, n)
    scale = 4.0 ** n
    return np.rint(lay.ax * scale).astype(np.int64), np.rint(lay.ay * scale).astype(np.int64)


def sigma_codes(n: int) -> np.ndarray:
    """Base-4 integer sum sigma_j 4**(n-j) of each square's axis word."""
    X, Y = integer_corners(n)
    # sigma digit = (2a + b)/3 digitwise, and the digit maps are linear
    return (2 * X + Y) // 3


def axis_tiling(n: int) -> tuple[np.ndarray, np.ndarray]:
    """0X projections of the level-n squares in units of L 4**-n / 3, sorted."""
    X, Y = integer_corners(n)
    lo = np.sort(2 * X + Y)
    return lo, lo + 3


def tiles_exactly(n: int) -> bool:
    lo, hi = axis_tiling(n)
    return bool(lo[0] == 0 and hi[-1] == 3 * 4 ** n and np.array_equal(hi[:-1], lo[1:])
                and np.array_equal(lo, 3 * np.arange(4 ** n)))


@dataclass(frozen=True)
class AxisInvariants:
    n: int
    pairs: int
    s_le_d: bool
    y_le_sqrt5_d: bool
    distinct_s_and_y: bool
    sharp_y_constant: float


def axis_invariants(n: int, chunk: int = 256) -> AxisInvariants:
    """Check |ds| <= d, |dy| <= sqrt5 d and ds, dy != 0 over all distinct pairs."""
    _check_level(n, MAX_EXHAUSTIVE_LEVEL, "exhaustive axis check")
    X, Y = integer_corners(n)
    S, T = 2 * X + Y, -X + 2 * Y
    code = sigma_codes(n)
    N = X.size
    ok_s = ok_y = ok_distinct = True
    sharp = 0.0
    for start in range(0, N, chunk):
        sl = slice(start, min(N, start + chunk))
        dS = np.abs(S[sl, None] - S[None, :])
        dT = np.abs(T[sl, None] - T[None, :])
        x = code[sl, None] ^ code[None, :]
        same = x == 0
        # common prefix m = n - ceil(bitlength/2);  d = L 4**-m = 3 h 4**(n - m) / sqrt5
        bl = np.where(same, 0, np.floor(np.log2(np.maximum(x, 1))).astype(np.int64) + 1)
        top = (bl + 1) // 2  # n - m
        dd = 3 * (np.int64(1) << (2 * top))  # sqrt5 d / h
        diff = ~same
        ok_s &= bool(np.all(dS[diff] <= dd[diff]))
        ok_y &= bool(np.all(dT[diff] ** 2 <= 5 * dd[diff] ** 2))  # |dy| <= sqrt5 d  <=>  T**2 <= 5 (sqrt5 d / h)**2
        ok_distinct &= bool(np.all((dS[diff] > 0) & (dT[diff] > 0)))
        if diff.any():
            # |dy| / d = |T| / (sqrt5 d / h)
            sharp = max(sharp, float(np.max(dT[diff] / dd[diff])))
    return AxisInvariants(n, N * (N - 1), ok_s, ok_y, ok_distinct, sharp)


# -------------------------------------------------- crucial-observation checker


@dataclass(frozen=True)
class Violation:
    theta: float
    square1: tuple[int, int]
    square2: tuple[int, int]
    j_expected: int
    j_actual: int
    k_actual: int

    def row(self, n: int) -> dict:
        h = 4.0 ** -n
        return {"theta": self.theta,
                "square1": f"{self.square1[0] * h:.17g} {self.square1[1] * h:.17g}",
                "square2": f"{self.square2[0] * h:.17g} {self.square2[1] * h:.17g}",
                "j_expected": self.j_expected, "j_actual": self.j_actual}


@dataclass(frozen=True)
class ViolationReport:
    n: int
    j: int
    slack: int
    theta_lo: float
    theta_hi: float
    samples: int
    pairs_checked: int
    j_histogram: dict
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def overlapping_pairs(l: np.ndarray, w: float) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (a, b), a != b, of intervals [l, l + w] with positive overlap."""
    order = np.argsort(l, kind="stable")
    ls = l[order]
    first, second = [], []
    d = 1
    while d < ls.size:
        hit = np.flatnonzero(ls[d:] - ls[:-d] < w)
        if hit.size == 0:
            break
        first.append(order[hit])
        second.append(order[hit + d])
        d += 1
    if not first:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(first), np.concatenate(second)


def crucial_observation_check(
    n: int,
    j: int,
    c1: float = 0.25,
    c2: float = 4.0,
    sample_count: int = 64,
    seed: int = 0,
    slack: int = 1,
) -> ViolationReport:
    """Sample directions at angle theta in J_j on either side of the 0X axis,
    find every pair of squares whose projections overlap, and check that each
    is a j'-pair with |j' - j| <= slack."""
    from .buffon import sector_bounds

    _check_level(n, MAX_BUCKET_LEVEL, "observation check")
    lo, hi = sector_bounds(j, c1, c2)
    if lo == hi:
        return ViolationReport(n, j, slack, lo, hi, 0, 0, {}, [])
    X, Y = integer_corners(n)
    h = 4.0 ** -n
    stream = rng.substream(seed, rng.TAG_THETA)
    idx = np.arange(sample_count, dtype=np.uint64)
    mags = lo + (hi - lo) * rng.uniform(stream, np.uint64(2) * idx)
    signs = np.where(rng.uniform(stream, np.uint64(2) * idx + np.uint64(1)) < 0.5, -1.0, 1.0)
    thetas = signs * mags
    hist: dict = {}
    violations = []
    checked = 0
    for theta in thetas:
        phi = AXIS_PHI + theta
        c, s = math.cos(phi), math.sin(phi)
        w = h * (abs(c) + abs(s))
        a, b = overlapping_pairs(X * h * c + Y * h * s, w)
        checked += a.size
        if a.size == 0:
            continue
        jj, kk = kernels.bucket_of_np(n, X[a] - X[b], Y[a] - Y[b])
        vals, cnt = np.unique(jj, return_counts=True)
        for v, cn in zip(vals.tolist(), cnt.tolist()):
            hist[v] = hist.get(v, 0) + 2 * cn
        bad = np.flatnonzero(np.abs(jj - j) > slack)
        for i in bad:
            violations.append(Violation(float(theta), (int(X[a[i]]), int(Y[a[i]])), (int(X[b[i]]), int(Y[b[i]])),
                                        j, int(jj[i]), int(kk[i])))
    return ViolationReport(n, j, slack, lo, hi, int(sample_count), 2 * checked, dict(sorted(hist.items())), violations)
