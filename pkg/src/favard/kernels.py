"""Hot loops, each in a numba and a pure-numpy flavour.

Public entry points dispatch on :func:`favard._accel.backend`.  The two
flavours perform the same floating-point operations in the same order where
it matters for exact comparisons (cell anchors, projection intervals); sums
are compensated in both, so results agree to rounding.

Reductions are deterministic: parallel loops write per-item slots and the
slots are summed serially afterwards, so the thread count never changes a
result.
"""
from __future__ import annotations

import math

import numpy as np

from . import rng
from ._accel import backend, njit, prange, thread_count

PI = math.pi
HALF_PI = 0.5 * math.pi

# --------------------------------------------------------------------------
# projection statistics: support length, first and second moment of the
# multiplicity function of N equal-width intervals [l_i, l_i + w]
# --------------------------------------------------------------------------


@njit
def _cell_span_nb(vx, vy, c, s):
    lo = np.inf
    hi = -np.inf
    for i in range(vx.size):
        p = vx[i] * c + vy[i] * s
        if p < lo:
            lo = p
        if p > hi:
            hi = p
    return lo, hi


BLOCK = 128
# left ends carry about three roundings each; gaps this close to the width
# are indistinguishable from abutment
SNAP_ULPS = 16.0
EPS = np.finfo(np.float64).eps


@njit
def snap_tolerance(l, w):
    if l.size == 0:
        return 0.0
    return SNAP_ULPS * EPS * (max(abs(l[0]), abs(l[l.size - 1])) + w)


@njit
def _stats_sorted_nb(l, w, moments):
    """(support, first moment, second moment) for intervals [l_i, l_i + w].

    ``l`` must be ascending.  Support adds min(w, gap) per interval; the
    second moment is the sum over ordered pairs of the overlap length
    max(0, w - |l_i - l_k|), walked with a sliding window.  Plain sums inside
    fixed blocks, Kahan across blocks.  With ``moments`` false only the
    support is computed (the moments come back as NaN).

    Gaps within ``snap_tolerance`` of w count as exact abutment, so rounding
    in the left ends cannot open or close slivers between touching cells.
    """
    n = l.size
    tol = snap_tolerance(l, w)
    sup = 0.0
    cs = 0.0
    m1 = 0.0
    c1 = 0.0
    m2 = 0.0
    c2 = 0.0
    j = 1
    for b0 in range(0, n, BLOCK):
        b1 = min(n, b0 + BLOCK)
        bs = 0.0
        b1s = 0.0
        b2s = 0.0
        for i in range(b0, b1):
            if i + 1 < n:
                g = l[i + 1] - l[i]
                bs += w if g >= w - tol else g
            else:
                bs += w
            if not moments:
                continue
            b1s += (l[i] + w) - l[i]
            if j < i + 1:
                j = i + 1
            while j < n and l[j] - l[i] < w - tol:
                j += 1
            acc = w
            for k in range(i + 1, j):
                acc += 2.0 * (w - (l[k] - l[i]))
            b2s += acc
        y = bs - cs
        t = sup + y
        cs = (t - sup) - y
        sup = t
        y = b1s - c1
        t = m1 + y
        c1 = (t - m1) - y
        m1 = t
        y = b2s - c2
        t = m2 + y
        c2 = (t - m2) - y
        m2 = t
    if not moments:
        return sup, np.nan, np.nan
    return sup, m1, m2


@njit(parallel=True)
def _projection_stats_nb(ax, ay, vx, vy, side, phis, moments):
    out = np.empty((phis.size, 3))
    for t in prange(phis.size):
        c = np.cos(phis[t])
        s = np.sin(phis[t])
        lo, hi = _cell_span_nb(vx, vy, c, s)
        lo *= side
        hi *= side
        l = ax * c + ay * s
        l.sort()
        l += lo
        sup, m1, m2 = _stats_sorted_nb(l, hi - lo, moments)
        out[t, 0] = sup
        out[t, 1] = m1
        out[t, 2] = m2
    return out


@njit(parallel=True)
def _projection_sweep_nb(ax, ay, vx, vy, side, phis, chunks, moments):
    """Like ``_projection_stats_nb`` for ascending ``phis``.

    Neighbouring directions permute the left ends only slightly, so each
    chunk keeps the previous order and repairs it by insertion sort, falling
    back to a full sort when the repair gets expensive.  The sorted array is
    unique, hence the output does not depend on ``chunks``.
    """
    P = phis.size
    N = ax.size
    out = np.empty((P, 3))
    bounds = np.linspace(0, P, chunks + 1).astype(np.int64)
    budget = 8 * N * max(1, int(math.log2(N + 1)))
    for ci in prange(chunks):
        a = bounds[ci]
        b = bounds[ci + 1]
        px = ax.copy()
        py = ay.copy()
        l = np.empty(N)
        lw = np.empty(N)
        fresh = True
        for t in range(a, b):
            c = np.cos(phis[t])
            s = np.sin(phis[t])
            ok = False
            if not fresh:
                for i in range(N):
                    l[i] = px[i] * c + py[i] * s
                moves = 0
                ok = True
                for i in range(1, N):
                    v = l[i]
                    if l[i - 1] <= v:
                        continue
                    vx_ = px[i]
                    vy_ = py[i]
                    k = i - 1
                    while k >= 0 and l[k] > v:
                        l[k + 1] = l[k]
                        px[k + 1] = px[k]
                        py[k + 1] = py[k]
                        k -= 1
                        moves += 1
                    l[k + 1] = v
                    px[k + 1] = vx_
                    py[k + 1] = vy_
                    if moves > budget:
                        ok = False
                        break
            if not ok:
                raw = px * c + py * s
                perm = np.argsort(raw)
                px = px[perm]
                py = py[perm]
                for i in range(N):
                    l[i] = raw[perm[i]]
                fresh = False
            lo, hi = _cell_span_nb(vx, vy, c, s)
            lo *= side
            hi *= side
            for i in range(N):
                lw[i] = l[i] + lo
            sup, m1, m2 = _stats_sorted_nb(lw, hi - lo, moments)
            out[t, 0] = sup
            out[t, 1] = m1
            out[t, 2] = m2
    return out


def _stats_sorted_np(l: np.ndarray, w: float, moments: bool) -> tuple[float, float, float]:
    g = np.diff(l)
    support = math.fsum(np.where(g >= w - snap_tolerance(l, w), w, g)) + w
    if not moments:
        return support, math.nan, math.nan
    xs = np.concatenate([l, l + w])
    steps = np.concatenate([np.ones(l.size, np.int64), -np.ones(l.size, np.int64)])
    order = np.argsort(xs, kind="stable")
    xs, steps = xs[order], steps[order]
    f = np.cumsum(steps)[:-1].astype(np.float64)
    gaps = np.diff(xs)
    return support, math.fsum(f * gaps), math.fsum(f * f * gaps)


def _projection_stats_np(ax, ay, vx, vy, side, phis, moments):
    out = np.empty((phis.size, 3))
    for t, phi in enumerate(phis):
        c, s = math.cos(phi), math.sin(phi)
        proj = vx * c + vy * s
        lo, hi = proj.min() * side, proj.max() * side
        l = np.sort(ax * c + ay * s) + lo
        out[t] = _stats_sorted_np(l, hi - lo, moments)
    return out


def projection_stats(layout, phis, moments: bool = True) -> np.ndarray:
    """(P, 3) array of (support_length, first_moment, second_moment)."""
    phis = np.ascontiguousarray(np.atleast_1d(phis), dtype=np.float64)
    vx = np.ascontiguousarray(layout.shape[:, 0])
    vy = np.ascontiguousarray(layout.shape[:, 1])
    side = float(layout.side)
    if backend() == "numpy":
        return _projection_stats_np(layout.ax, layout.ay, vx, vy, side, phis, moments)
    if phis.size < 4:
        return _projection_stats_nb(layout.ax, layout.ay, vx, vy, side, phis, moments)
    order = np.argsort(phis, kind="stable")
    res = _projection_sweep_nb(layout.ax, layout.ay, vx, vy, side,
                               np.ascontiguousarray(phis[order]), thread_count(), moments)
    out = np.empty_like(res)
    out[order] = res
    return out


def support_lengths(layout, phis) -> np.ndarray:
    return projection_stats(layout, phis, moments=False)[:, 0]


# --------------------------------------------------------------------------
# needle descent through the cell tree
# --------------------------------------------------------------------------


class TreeSpec:
    """Everything the descent needs to rebuild the cells of a model lazily."""

    def __init__(self, model, n: int):
        from .models import FOUR_CORNER_OFFSETS, SIERPINSKI_OFFSETS, UNIT_SQUARE, UNIT_TRIANGLE

        self.code = model.kind.code
        self.n = int(n)
        self.seed = np.uint64(model.seed)
        if model.is_triangular:
            base, shape, ratio = SIERPINSKI_OFFSETS, UNIT_TRIANGLE, 1.0 / 3.0
        else:
            base, shape, ratio = FOUR_CORNER_OFFSETS, UNIT_SQUARE, 0.25
        self.ox = np.ascontiguousarray(base[:, 0])
        self.oy = np.ascontiguousarray(base[:, 1])
        self.vx = np.ascontiguousarray(shape[:, 0])
        self.vy = np.ascontiguousarray(shape[:, 1])
        # same expression as models.cell_layout so anchors agree bit for bit
        self.sides = np.array([1.0] + [ratio ** k for k in range(1, n + 1)])


@njit
def _descend_nb(code, n, seed, ox, oy, vx, vy, sides, c, s, t):
    lo_u, hi_u = _cell_span_nb(vx, vy, c, s)
    K = ox.size
    cap = K * n + 2
    sx = np.empty(cap)
    sy = np.empty(cap)
    sl = np.empty(cap, np.int64)
    sid = np.empty(cap, np.int64)
    sx[0] = 0.0
    sy[0] = 0.0
    sl[0] = 0
    sid[0] = 0
    top = 1
    while top > 0:
        top -= 1
        x = sx[top]
        y = sy[top]
        lev = sl[top]
        nid = sid[top]
        side = sides[lev]
        p = x * c + y * s
        if t < p + side * lo_u or t > p + side * hi_u:
            continue
        if lev == n:
            return True
        cs = sides[lev + 1]
        for q in range(K):
            if code == 2:
                key = (np.uint64(lev + 1) << np.uint64(56)) | np.uint64(4 * nid + q)
                r = np.int64(rng.draw_nb(seed, key) >> np.uint64(62))
                dx = np.float64(2 * (q >> 1) + (r >> 1))
                dy = np.float64(2 * (q & 1) + (r & 1))
            else:
                dx = ox[q]
                dy = oy[q]
            sx[top] = x + dx * cs
            sy[top] = y + dy * cs
            sl[top] = lev + 1
            sid[top] = 4 * nid + q
            top += 1
    return False


@njit(parallel=True)
def _needle_hits_nb(code, n, seed, ox, oy, vx, vy, sides, phis, offsets):
    out = np.zeros(phis.size, np.bool_)
    for i in prange(phis.size):
        out[i] = _descend_nb(code, n, seed, ox, oy, vx, vy, sides, np.cos(phis[i]), np.sin(phis[i]), offsets[i])
    return out


@njit(parallel=True)
def _buffon_nb(code, n, seed, ox, oy, vx, vy, sides, mc_seed, trials, cx, cy, half):
    hit = np.zeros(trials, np.uint8)
    for i in prange(trials):
        u1 = rng.uniform_nb(mc_seed, 2 * i)
        u2 = rng.uniform_nb(mc_seed, 2 * i + 1)
        phi = PI * u1
        c = np.cos(phi)
        s = np.sin(phi)
        t = (cx * c + cy * s) - half + 2.0 * half * u2
        if _descend_nb(code, n, seed, ox, oy, vx, vy, sides, c, s, t):
            hit[i] = 1
    total = 0
    for i in range(trials):
        total += hit[i]
    return total


def _needle_hits_np(tree: TreeSpec, phis, offsets, chunk: int = 1 << 15):
    out = np.zeros(phis.size, dtype=bool)
    shape = np.column_stack([tree.vx, tree.vy])
    for start in range(0, phis.size, chunk):
        ph = phis[start:start + chunk]
        tt = offsets[start:start + chunk]
        c, s = np.cos(ph), np.sin(ph)
        proj = shape[:, 0][None, :] * c[:, None] + shape[:, 1][None, :] * s[:, None]
        lo_u, hi_u = proj.min(axis=1), proj.max(axis=1)
        idx = np.arange(ph.size)
        x = np.zeros(ph.size)
        y = np.zeros(ph.size)
        nid = np.zeros(ph.size, dtype=np.int64)
        for lev in range(tree.n + 1):
            side = tree.sides[lev]
            p = x * c[idx] + y * s[idx]
            keep = (tt[idx] >= p + side * lo_u[idx]) & (tt[idx] <= p + side * hi_u[idx])
            idx, x, y, nid = idx[keep], x[keep], y[keep], nid[keep]
            if lev == tree.n or idx.size == 0:
                break
            cs = tree.sides[lev + 1]
            K = tree.ox.size
            if tree.code == 2:
                q = np.arange(4, dtype=np.int64)
                keys = (np.uint64(lev + 1) << np.uint64(56)) | (
                    nid.astype(np.uint64)[:, None] * np.uint64(4) + q.astype(np.uint64)[None, :]
                )
                r = (rng.draw(int(tree.seed), keys) >> np.uint64(62)).astype(np.int64)
                dx = (2 * (q[None, :] >> 1) + (r >> 1)).astype(np.float64)
                dy = (2 * (q[None, :] & 1) + (r & 1)).astype(np.float64)
            else:
                dx = np.broadcast_to(tree.ox, (idx.size, K))
                dy = np.broadcast_to(tree.oy, (idx.size, K))
            x = (x[:, None] + dx * cs).ravel()
            y = (y[:, None] + dy * cs).ravel()
            nid = (nid[:, None] * 4 + np.arange(K)[None, :]).ravel()
            idx = np.repeat(idx, K)
        if idx.size:
            out[start + np.unique(idx)] = True
    return out


def needle_hits(tree: TreeSpec, phis, offsets) -> np.ndarray:
    phis = np.ascontiguousarray(np.atleast_1d(phis), dtype=np.float64)
    offsets = np.ascontiguousarray(np.atleast_1d(offsets), dtype=np.float64)
    if backend() == "numba":
        return _needle_hits_nb(tree.code, tree.n, tree.seed, tree.ox, tree.oy, tree.vx, tree.vy,
                               tree.sides, phis, offsets)
    return _needle_hits_np(tree, phis, offsets)


def needle_samples(mc_seed: int, trials: int, centre, half: float):
    """Directions and offsets of the Buffon throws (numpy path and tests)."""
    k = np.arange(trials, dtype=np.uint64)
    u1 = rng.uniform(mc_seed, 2 * k)
    u2 = rng.uniform(mc_seed, 2 * k + np.uint64(1))
    phis = PI * u1
    c, s = np.cos(phis), np.sin(phis)
    offsets = (centre[0] * c + centre[1] * s) - half + 2.0 * half * u2
    return phis, offsets


def buffon_hits(tree: TreeSpec, mc_seed: int, trials: int, centre, half: float) -> int:
    if backend() == "numba":
        return int(_buffon_nb(tree.code, tree.n, tree.seed, tree.ox, tree.oy, tree.vx, tree.vy, tree.sides,
                              np.uint64(mc_seed), int(trials), float(centre[0]), float(centre[1]), float(half)))
    hits = 0
    chunk = 1 << 18
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        k = np.arange(start, start + m, dtype=np.uint64)
        u1 = rng.uniform(mc_seed, np.uint64(2) * k)
        u2 = rng.uniform(mc_seed, np.uint64(2) * k + np.uint64(1))
        phis = PI * u1
        c, s = np.cos(phis), np.sin(phis)
        offsets = (centre[0] * c + centre[1] * s) - half + 2.0 * half * u2
        hits += int(_needle_hits_np(tree, phis, offsets).sum())
    return hits


# --------------------------------------------------------------------------
# pair overlap integral of two equal squares
# --------------------------------------------------------------------------


@njit
def _root_in(A, B, a, b):
    """Zero of A cos + B sin inside the open interval (a, b), else -1."""
    if A == 0.0 and B == 0.0:
        return -1.0
    r = math.atan2(A, -B)
    if r < 0.0:
        r += PI
    if r >= PI:
        r -= PI
    if a < r < b:
        return r
    return -1.0


@njit
def overlap_unit_nb(X, Y):
    """Integral over [0, pi] of max(0, |cos|+|sin| - |X cos + Y sin|).

    This is the overlap length of the projections of two unit squares whose
    corners differ by (X, Y).  Exact: the integrand is a cos + b sin between
    the kinks, which are all located first.
    """
    total = 0.0
    pts = np.empty(5)
    for quad in range(2):
        a = 0.0 if quad == 0 else HALF_PI
        b = HALF_PI if quad == 0 else PI
        sc = 1.0 if quad == 0 else -1.0
        A1 = sc - X
        B1 = 1.0 - Y
        A2 = sc + X
        B2 = 1.0 + Y
        m = 0
        pts[m] = a
        m += 1
        for A, B in ((A1, B1), (A2, B2), (X, Y)):
            r = _root_in(A, B, a, b)
            if r >= 0.0:
                pts[m] = r
                m += 1
        pts[m] = b
        m += 1
        seg = np.sort(pts[:m])
        for i in range(m - 1):
            u = seg[i]
            v = seg[i + 1]
            if v <= u:
                continue
            mid = 0.5 * (u + v)
            cm = math.cos(mid)
            sm = math.sin(mid)
            g1 = A1 * cm + B1 * sm
            g2 = A2 * cm + B2 * sm
            if g1 <= 0.0 or g2 <= 0.0:
                continue
            if g1 <= g2:
                A, B = A1, B1
            else:
                A, B = A2, B2
            total += A * (math.sin(v) - math.sin(u)) - B * (math.cos(v) - math.cos(u))
    return total


def _roots_np(A, B, a, b):
    r = np.arctan2(A, -B)
    r = np.where(r < 0.0, r + PI, r)
    r = np.where(r >= PI, r - PI, r)
    ok = (a < r) & (r < b) & ~((A == 0.0) & (B == 0.0))
    return np.where(ok, r, a)


def overlap_unit_np(X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    total = np.zeros(np.broadcast(X, Y).shape)
    X, Y = np.broadcast_arrays(X, Y)
    for a, b, sc in ((0.0, HALF_PI, 1.0), (HALF_PI, PI, -1.0)):
        A1, B1, A2, B2 = sc - X, 1.0 - Y, sc + X, 1.0 + Y
        pts = np.stack([
            np.full(X.shape, a), _roots_np(A1, B1, a, b), _roots_np(A2, B2, a, b),
            _roots_np(X, Y, a, b), np.full(X.shape, b),
        ], axis=-1)
        pts.sort(axis=-1)
        for i in range(4):
            u, v = pts[..., i], pts[..., i + 1]
            mid = 0.5 * (u + v)
            cm, sm = np.cos(mid), np.sin(mid)
            g1 = A1 * cm + B1 * sm
            g2 = A2 * cm + B2 * sm
            use = (v > u) & (g1 > 0.0) & (g2 > 0.0)
            A = np.where(g1 <= g2, A1, A2)
            B = np.where(g1 <= g2, B1, B2)
            piece = A * (np.sin(v) - np.sin(u)) - B * (np.cos(v) - np.cos(u))
            total += np.where(use, piece, 0.0)
    return total


def overlap_unit(X, Y):
    if backend() == "numba" and np.ndim(X) == 0 and np.ndim(Y) == 0:
        return float(overlap_unit_nb(float(X), float(Y)))
    out = overlap_unit_np(X, Y)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# exact (j, k) bucket of a difference class
# --------------------------------------------------------------------------
#
# Corner differences (X, Y) are integers in units of h = 4**-n.  In the 0X/0Y
# frame: ds = S h / sqrt5 and dy = T h / sqrt5 with S = 2X + Y, T = -X + 2Y.
#   j      = max(0, floor(log4 |T|/|S|))  -> largest m >= 0 with 4**m |S| <= |T|
#   k + j  = floor(log4 1/|ds|) = n - e   where e is the least e with S**2 <= 5*16**e


@njit
def bucket_of_nb(n, X, Y):
    S = abs(2 * X + Y)
    T = abs(-X + 2 * Y)
    if S == 0 or T == 0:
        return -1, 0
    j = 0
    while (S << (2 * (j + 1))) <= T:
        j += 1
    e = 0
    while S * S > 5 * (1 << (4 * e)):
        e += 1
    return j, n - e - j


def bucket_of_np(n, X, Y):
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    S = np.abs(2 * X + Y)
    T = np.abs(-X + 2 * Y)
    j = np.zeros(S.shape, dtype=np.int64)
    live = S > 0
    while True:
        step = live & ((S << (2 * (j + 1))) <= T)
        if not step.any():
            break
        j += step
    e = np.zeros(S.shape, dtype=np.int64)
    while True:
        step = S * S > 5 * (np.int64(1) << (4 * e))
        if not step.any():
            break
        e += step
    bad = (S == 0) | (T == 0)
    return np.where(bad, -1, j), np.where(bad, 0, n - e - j)


def table_shape(n: int) -> tuple[int, int, int]:
    """(rows for j, columns for k, column offset of k = 0)."""
    return n + 3, 2 * n + 7, n + 3


@njit(parallel=True)
def _bucket_table_nb(n, D, M):
    J, K, koff = n + 3, 2 * n + 7, n + 3
    N = D.size
    rows = np.zeros((N, J, K), np.int64)
    bad = np.zeros(N, np.int64)
    for ix in prange(N):
        for iy in range(N):
            X = D[ix]
            Y = D[iy]
            if X == 0 and Y == 0:
                continue
            j, k = bucket_of_nb(n, X, Y)
            if j < 0:
                bad[ix] += M[ix] * M[iy]
                continue
            rows[ix, j, k + koff] += M[ix] * M[iy]
    return rows.sum(axis=0), bad.sum()


@njit(parallel=True)
def _overlap_table_nb(n, D, M):
    J, K, koff = n + 3, 2 * n + 7, n + 3
    N = D.size
    rows = np.zeros((N, J, K))
    for ix in prange(N):
        for iy in range(N):
            X = D[ix]
            Y = D[iy]
            if X == 0 and Y == 0:
                continue
            j, k = bucket_of_nb(n, X, Y)
            if j < 0:
                continue
            rows[ix, j, k + koff] += M[ix] * M[iy] * overlap_unit_nb(np.float64(X), np.float64(Y))
    out = np.zeros((J, K))
    for ix in range(N):
        out += rows[ix]
    return out


def _class_grid(D, M, row_chunk):
    N = D.size
    for start in range(0, N, row_chunk):
        stop = min(N, start + row_chunk)
        X = np.repeat(D[start:stop], N)
        Y = np.tile(D, stop - start)
        C = np.repeat(M[start:stop], N) * np.tile(M, stop - start)
        nz = (X != 0) | (Y != 0)
        yield X[nz], Y[nz], C[nz]


def _bucket_table_np(n, D, M):
    J, K, koff = table_shape(n)
    table = np.zeros((J, K), np.int64)
    bad = 0
    for X, Y, C in _class_grid(D, M, max(1, (1 << 21) // D.size)):
        j, k = bucket_of_np(n, X, Y)
        ok = j >= 0
        bad += int(C[~ok].sum())
        np.add.at(table, (j[ok], k[ok] + koff), C[ok])
    return table, bad


def _overlap_table_np(n, D, M):
    J, K, koff = table_shape(n)
    table = np.zeros((J, K))
    for X, Y, C in _class_grid(D, M, max(1, (1 << 19) // D.size)):
        j, k = bucket_of_np(n, X, Y)
        ok = j >= 0
        vals = C[ok] * overlap_unit_np(X[ok].astype(np.float64), Y[ok].astype(np.float64))
        np.add.at(table, (j[ok], k[ok] + koff), vals)
    return table


def bucket_table(n: int, D: np.ndarray, M: np.ndarray):
    """Ordered distinct pair counts per (j, k); also the degenerate count."""
    if backend() == "numba":
        t, bad = _bucket_table_nb(n, D, M)
        return t, int(bad)
    return _bucket_table_np(n, D, M)


def overlap_table(n: int, D: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Per-(j, k) sums of count * unit overlap integral (multiply by 4**-n)."""
    if backend() == "numba":
        return _overlap_table_nb(n, D, M)
    return _overlap_table_np(n, D, M)


# --------------------------------------------------------------------------
# Riesz 1-energy sums
# --------------------------------------------------------------------------


@njit(parallel=True)
def _riesz_classes_nb(n, D, M):
    N = D.size
    rows = np.zeros((N, n + 2))
    for ix in prange(N):
        for iy in range(N):
            X = D[ix]
            Y = D[iy]
            r2 = X * X + Y * Y
            if r2 == 0:
                continue
            e = 0
            while r2 > (1 << (4 * e)):
                e += 1
            rows[ix, n - e + 1] += M[ix] * M[iy] / math.sqrt(r2)
    out = np.zeros(n + 2)
    for ix in range(N):
        out += rows[ix]
    return out


def _riesz_classes_np(n, D, M):
    out = np.zeros(n + 2)
    for X, Y, C in _class_grid(D, M, max(1, (1 << 21) // D.size)):
        r2 = X * X + Y * Y
        e = np.zeros(r2.shape, np.int64)
        while True:
            step = r2 > (np.int64(1) << (4 * e))
            if not step.any():
                break
            e += step
        np.add.at(out, n - e + 1, C / np.sqrt(r2.astype(np.float64)))
    return out


def riesz_classes(n: int, D: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Per-scale sums of count / |delta| in units of 4**-n.

    Slot ``k + 1`` holds scale k = floor(log4 1/|delta|) (k >= -1 since
    |delta| < 4**1 always).
    """
    if backend() == "numba":
        return _riesz_classes_nb(n, D, M)
    return _riesz_classes_np(n, D, M)


@njit(parallel=True)
def _riesz_direct_nb(px, py, w, kmin, kmax):
    N = px.size
    nb = kmax - kmin + 1
    rows = np.zeros((N, nb))
    log4 = math.log(4.0)
    for i in prange(N):
        for k in range(N):
            if k == i:
                continue
            d = math.hypot(px[i] - px[k], py[i] - py[k])
            b = int(math.floor(-math.log(d) / log4))
            if b < kmin:
                b = kmin
            if b > kmax:
                b = kmax
            rows[i, b - kmin] += w[i] * w[k] / d
    out = np.zeros(nb)
    for i in range(N):
        out += rows[i]
    return out


def _riesz_direct_np(px, py, w, kmin, kmax):
    N = px.size
    out = np.zeros(kmax - kmin + 1)
    chunk = max(1, (1 << 21) // max(N, 1))
    for start in range(0, N, chunk):
        sl = slice(start, min(N, start + chunk))
        d = np.hypot(px[sl, None] - px[None, :], py[sl, None] - py[None, :])
        ww = w[sl, None] * w[None, :]
        own = np.arange(sl.start, sl.stop)
        d[own - start, own] = np.inf
        b = np.clip(np.floor(-np.log(d) / math.log(4.0)), kmin, kmax)
        b[own - start, own] = kmin
        np.add.at(out, (b - kmin).astype(np.int64).ravel(), (ww / d).ravel())
    return out


def riesz_direct(points: np.ndarray, masses: np.ndarray, kmin: int, kmax: int) -> np.ndarray:
    """Per-scale sums over ordered distinct atom pairs of m_i m_k / |z_i - z_k|."""
    px = np.ascontiguousarray(points[:, 0])
    py = np.ascontiguousarray(points[:, 1])
    w = np.ascontiguousarray(masses, dtype=np.float64)
    if backend() == "numba":
        return _riesz_direct_nb(px, py, w, kmin, kmax)
    return _riesz_direct_np(px, py, w, kmin, kmax)
