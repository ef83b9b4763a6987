"""Open-path travelling-salesman solvers on lattice point sets.

All solvers work with free endpoints and L1 geodesics: a tour is an
ordering of the input points, its length the sum of L1 gaps, and the
returned lattice path realizes each gap as a monotone staircase.  The
exact solver is a subset dynamic program over visiting orders; the
heuristics are a boustrophedon strip sweep, a perimeter-walk tour for
connected sets, and a box-decomposition solver for diluted ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ResourceLimitError
from .lattice import Point, PointSet

INT_INF = np.int64(1) << np.int64(40)


class GridPath:
    """Directed lattice path: consecutive vertices at L1 distance 1."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: Sequence[tuple[int, int]], validate: bool = True):
        self.vertices = np.asarray(
            [(v[0], v[1]) for v in vertices], dtype=np.int64
        ).reshape(-1, 2)
        if validate and len(self.vertices) > 1:
            gaps = np.abs(np.diff(self.vertices, axis=0)).sum(axis=1)
            if not np.all(gaps == 1):
                raise DomainError("grid path steps must have L1 length 1")

    @property
    def length(self) -> int:
        return max(0, self.vertices.shape[0] - 1)

    def point_set(self) -> PointSet:
        if not self.vertices.size:
            return PointSet()
        return PointSet.from_arrays(self.vertices[:, 0], self.vertices[:, 1])

    def start(self) -> Point:
        return Point(int(self.vertices[0, 0]), int(self.vertices[0, 1]))

    def end(self) -> Point:
        return Point(int(self.vertices[-1, 0]), int(self.vertices[-1, 1]))

    def reversed(self) -> "GridPath":
        return GridPath(self.vertices[::-1], validate=False)

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __repr__(self) -> str:
        return f"GridPath(len={self.length})"


def staircase(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    """Monotone L1 path from a to b, x first then y, excluding a."""
    out = []
    x, y = int(a[0]), int(a[1])
    sx = 1 if b[0] >= x else -1
    while x != b[0]:
        x += sx
        out.append((x, y))
    sy = 1 if b[1] >= y else -1
    while y != b[1]:
        y += sy
        out.append((x, y))
    return out


def realize_order(order: np.ndarray) -> GridPath:
    """Expand a visiting order into an actual lattice path."""
    if order.shape[0] == 0:
        return GridPath([], validate=False)
    verts = [(int(order[0, 0]), int(order[0, 1]))]
    for i in range(1, order.shape[0]):
        verts.extend(staircase(verts[-1], (int(order[i, 0]), int(order[i, 1]))))
    return GridPath(verts, validate=False)


def order_length(order: np.ndarray) -> int:
    if order.shape[0] < 2:
        return 0
    return int(np.abs(np.diff(order, axis=0)).sum())


@dataclass
class BoxTspStats:
    """Bookkeeping from the box-decomposition solver."""

    box_side: int
    n_boxes_visited: int
    n_boxes_full: int
    full_subtour_total: int
    other_subtour_total: int
    connect_total: int
    range_size: int
    range_boundary_size: int

    def decomposition_budget(self) -> float:
        """Full-box subtours plus the non-full and perimeter allowances."""
        c = self.box_side
        return (
            self.full_subtour_total
            + (2 * c * c + 4) * self.range_boundary_size
            + 4 * self.range_size / c
        )


@dataclass
class TspResult:
    length: int
    order: np.ndarray
    exact: bool
    stats: BoxTspStats | None = field(default=None, repr=False)

    @cached_property
    def path(self) -> GridPath:
        return realize_order(self.order)

    def visits_all(self, points: PointSet) -> bool:
        visited = (
            PointSet.from_arrays(self.order[:, 0], self.order[:, 1])
            if self.order.size
            else PointSet()
        )
        return all(p in visited for p in points)


def _points_array(points: PointSet | Iterable[tuple[int, int]]) -> np.ndarray:
    if isinstance(points, PointSet):
        xs, ys = points.arrays()
        arr = np.stack([xs, ys], axis=1)
    else:
        arr = np.asarray([(p[0], p[1]) for p in points], dtype=np.int64).reshape(
            -1, 2
        )
        if arr.size:
            arr = np.unique(arr, axis=0)
    # lexicographic (x, y) order fixes all downstream tie-breaking
    if arr.size:
        idx = np.lexsort((arr[:, 1], arr[:, 0]))
        arr = arr[idx]
    return arr


def _l1_matrix(pts: np.ndarray) -> np.ndarray:
    return np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)


# ---------------------------------------------------------------------------
# exact solver: subset DP over visiting orders, free endpoints


def _popcounts(n_masks: int) -> np.ndarray:
    masks = np.arange(n_masks, dtype=np.uint32)
    pops = np.zeros(n_masks, dtype=np.uint8)
    while masks.any():
        pops += (masks & 1).astype(np.uint8)
        masks >>= 1
    return pops


def held_karp_order(dmat: np.ndarray) -> tuple[int, list[int]]:
    """Shortest open path through all nodes of a complete graph.

    Returns (length, node order).  Both endpoints are free; ties resolve
    to the lowest node index at every argmin.
    """
    n = dmat.shape[0]
    if n == 1:
        return 0, [0]
    size = 1 << n
    dp = np.full((size, n), INT_INF, dtype=np.int64)
    parent = np.full((size, n), -1, dtype=np.int8)
    nodes = np.arange(n)
    dp[1 << nodes, nodes] = 0
    pops = _popcounts(size)
    all_masks = np.arange(size, dtype=np.int64)
    dcols = dmat.astype(np.int64)
    for k in range(2, n + 1):
        masks_k = all_masks[pops == k]
        for j in range(n):
            has_j = (masks_k >> j) & 1 == 1
            mj = masks_k[has_j]
            if not mj.size:
                continue
            prev = mj ^ (1 << j)
            cand = dp[prev] + dcols[:, j][None, :]
            best = cand.argmin(axis=1)
            val = cand[np.arange(mj.size), best]
            dp[mj, j] = val
            parent[mj, j] = best
    full = size - 1
    end = int(dp[full].argmin())
    length = int(dp[full, end])
    order = [end]
    mask, j = full, end
    while parent[mask, j] >= 0:
        i = int(parent[mask, j])
        mask ^= 1 << j
        j = i
        order.append(j)
    order.reverse()
    return length, order


def exact_tsp(points: PointSet | Iterable[tuple[int, int]], cap: int = 18) -> TspResult:
    """Exact minimal visiting path via the subset dynamic program."""
    pts = _points_array(points)
    n = pts.shape[0]
    if n == 0:
        raise DomainError("exact_tsp needs a non-empty point set")
    if n > cap:
        raise ResourceLimitError(f"{n} points exceeds exact solver cap {cap}")
    if n == 1:
        return TspResult(0, pts, exact=True)
    length, order = held_karp_order(_l1_matrix(pts))
    return TspResult(length, pts[order], exact=True)


# ---------------------------------------------------------------------------
# strip heuristic


def strip_heuristic(
    points: PointSet | Iterable[tuple[int, int]], square_side: int
) -> TspResult:
    """Boustrophedon strips of width ceil(M / ceil(sqrt(N))).

    Guarantee, asserted in tests: length <= 2*M*ceil(sqrt(N)) + 2*M for
    points inside a declared M x M square.
    """
    pts = _points_array(points)
    n = pts.shape[0]
    if n == 0:
        raise DomainError("strip heuristic needs a non-empty point set")
    m = int(square_side)
    x0, y0 = int(pts[:, 0].min()), int(pts[:, 1].min())
    if pts[:, 0].max() - x0 >= m or pts[:, 1].max() - y0 >= m:
        raise DomainError(f"points do not fit in the declared {m}x{m} square")
    k = int(np.ceil(np.sqrt(n)))
    w = max(1, (m + k - 1) // k)
    strip = (pts[:, 0] - x0) // w
    ysign = np.where(strip % 2 == 0, 1, -1)
    keys = np.lexsort((pts[:, 0] * ysign, pts[:, 1] * ysign, strip))
    order = pts[keys]
    return TspResult(order_length(order), order, exact=False)


# ---------------------------------------------------------------------------
# local improvement (nearest neighbour + 2-opt with a phantom endpoint)


def _nearest_neighbour(dmat: np.ndarray) -> list[int]:
    n = dmat.shape[0]
    visited = np.zeros(n, dtype=bool)
    order = [0]
    visited[0] = True
    for _ in range(n - 1):
        row = dmat[order[-1]].astype(np.float64)
        row[visited] = np.inf
        nxt = int(row.argmin())
        order.append(nxt)
        visited[nxt] = True
    return order


def _two_opt_sweeps(d: np.ndarray, cyc: np.ndarray, rounds: int) -> bool:
    """Best-improvement 2-opt moves on the cycle; True if anything improved."""
    m = cyc.shape[0]
    iu = np.triu_indices(m, k=1)
    improved = False
    for _ in range(rounds):
        succ = np.roll(cyc, -1)
        w = d[cyc, succ]
        delta = d[np.ix_(cyc, cyc)] + d[np.ix_(succ, succ)] - w[:, None] - w[None, :]
        flat = delta[iu]
        best = int(flat.argmin())
        if flat[best] >= 0:
            break
        i, j = int(iu[0][best]), int(iu[1][best])
        cyc[i + 1 : j + 1] = cyc[i + 1 : j + 1][::-1]
        improved = True
    return improved


def _or_opt_sweeps(d: np.ndarray, cyc: np.ndarray, rounds: int) -> bool:
    """Relocate segments of length 1..3 to their best position on the cycle."""
    m = cyc.shape[0]
    improved = False
    for _ in range(rounds):
        best_delta = 0
        best_move = None
        succ = np.roll(cyc, -1)
        w = d[cyc, succ]
        gap_cost = w  # d(c[j], c[j+1]) for insertion after position j
        for seg in (1, 2, 3):
            if m - seg < 3:
                continue
            a = np.roll(cyc, 1)  # predecessor of segment start
            first = cyc
            last = np.roll(cyc, -(seg - 1))
            b = np.roll(cyc, -seg)
            gain = d[a, first] + d[last, b] - d[a, b]
            # ins[j, i]: cost of inserting the segment starting at i after j
            ins = (
                d[cyc[:, None], first[None, :]]
                + d[np.roll(cyc, -1)[:, None], last[None, :]]
                - gap_cost[:, None]
            )
            delta = ins - gain[None, :]
            # forbid insertions at or inside the removed segment
            jj = np.arange(m)[:, None]
            ii = np.arange(m)[None, :]
            off = (jj - (ii - 1)) % m
            delta[off <= seg] = 1 << 30
            k = int(delta.argmin())
            j, i = divmod(k, m)
            if delta[j, i] < best_delta:
                best_delta = int(delta[j, i])
                best_move = (seg, i, j)
        if best_move is None:
            break
        seg, i, j = best_move
        idxs = {(i + t) % m for t in range(seg)}
        segment = [int(cyc[(i + t) % m]) for t in range(seg)]
        reduced = [int(cyc[t]) for t in range(m) if t not in idxs]
        at = reduced.index(int(cyc[j]))
        cyc[:] = np.array(reduced[: at + 1] + segment + reduced[at + 1 :])
        improved = True
    return improved


def _two_opt_path(dmat: np.ndarray, order: list[int], max_rounds: int = 0) -> list[int]:
    """2-opt plus segment relocation on the open path, via a phantom node."""
    n = dmat.shape[0]
    d = np.zeros((n + 1, n + 1), dtype=np.int64)
    d[:n, :n] = dmat
    cyc = np.array(order + [n])
    m = n + 1
    rounds = max_rounds or 4 * m + 20
    for _ in range(8):
        a = _two_opt_sweeps(d, cyc, rounds)
        b = _or_opt_sweeps(d, cyc, rounds)
        if not (a or b):
            break
    pos = int(np.where(cyc == n)[0][0])
    path = np.concatenate([cyc[pos + 1 :], cyc[:pos]])
    return [int(v) for v in path]


def polish_order(order: np.ndarray, window: int = 16, rounds: int = 6) -> np.ndarray:
    """Windowed 2-opt polish for long visit orders.

    Applies segment reversals order[i+1..j] with j - i <= window, chosen
    greedily and non-overlapping per pass; linear work per pass, so it
    scales to the chained tours the box solver emits.  Distances use the
    first two columns, so callers may carry extra payload columns.
    """
    pts = order.astype(np.int64)
    n = pts.shape[0]
    if n < 4:
        return pts
    xy = pts[:, :2]
    for _ in range(rounds):
        gaps = np.abs(np.diff(xy, axis=0)).sum(axis=1)
        best_delta = np.zeros(n, dtype=np.int64)
        best_j = np.full(n, -1, dtype=np.int64)
        for k in range(2, window + 1):
            i = np.arange(0, n - k - 1)
            j = i + k
            delta = (
                np.abs(xy[i] - xy[j]).sum(axis=1)
                + np.abs(xy[i + 1] - xy[j + 1]).sum(axis=1)
                - gaps[i]
                - gaps[j]
            )
            upd = delta < best_delta[i]
            best_delta[i[upd]] = delta[upd]
            best_j[i[upd]] = j[upd]
        if not np.any(best_delta < 0):
            break
        # apply non-overlapping improving reversals greedily, left to right
        taken = -1
        for i in np.flatnonzero(best_delta < 0):
            if i <= taken:
                continue
            j = int(best_j[i])
            pts[i + 1 : j + 1] = pts[i + 1 : j + 1][::-1]
            taken = j
        xy = pts[:, :2]
    return pts


_perm_cache: dict[int, np.ndarray] = {}


def _all_orders(n: int) -> np.ndarray:
    """All permutations of range(n), lexicographic, cached."""
    if n not in _perm_cache:
        from itertools import permutations

        _perm_cache[n] = np.array(list(permutations(range(n))), dtype=np.int8)
    return _perm_cache[n]


def _brute_exact_order(pts: np.ndarray, dmat: np.ndarray) -> tuple[int, np.ndarray]:
    perms = _all_orders(pts.shape[0])
    lengths = dmat[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    best = int(lengths.argmin())
    return int(lengths[best]), pts[perms[best]]


def improved_heuristic_order(pts: np.ndarray, exact_cap: int = 12) -> np.ndarray:
    """Best effort order: exact below the cap, else NN + 2-opt."""
    n = pts.shape[0]
    if n <= 2:
        return pts
    dmat = _l1_matrix(pts)
    if n <= min(exact_cap, 8):
        return _brute_exact_order(pts, dmat)[1]
    if n <= exact_cap:
        _, order = held_karp_order(dmat)
        return pts[order]
    order = _two_opt_path(dmat, _nearest_neighbour(dmat))
    return pts[order]


# ---------------------------------------------------------------------------
# connected-set tour: perimeter walk of covering boxes plus insertions


def _require_connected(pts: np.ndarray) -> None:
    cells = {(int(x), int(y)) for x, y in pts}
    if not cells:
        raise DomainError("empty point set")
    stack = [next(iter(sorted(cells)))]
    seen = {stack[0]}
    while stack:
        x, y = stack.pop()
        for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nb in cells and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if len(seen) != len(cells):
        raise DomainError("point set is not 4-connected")


def _box_ring(bx: int, by: int, c: int, x0: int, y0: int) -> list[tuple[int, int]]:
    """Perimeter cells of the box with box coordinates (bx, by)."""
    lx, ly = x0 + bx * c, y0 + by * c
    if c == 1:
        return [(lx, ly)]
    ring = []
    for x in range(lx, lx + c):
        ring.append((x, ly))
    for y in range(ly + 1, ly + c):
        ring.append((lx + c - 1, y))
    for x in range(lx + c - 2, lx - 1, -1):
        ring.append((x, ly + c - 1))
    for y in range(ly + c - 2, ly, -1):
        ring.append((lx, y))
    return ring


def hilbert_index(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Hilbert-curve index of non-negative integer cells, vectorised.

    Used to scan boxes in a locality-preserving order, so consecutive
    occupied boxes in the chain are almost always neighbours even when
    the occupied region is full of holes.
    """
    xs = np.asarray(xs, dtype=np.int64).copy()
    ys = np.asarray(ys, dtype=np.int64).copy()
    hi = max(int(xs.max(initial=0)), int(ys.max(initial=0)), 1)
    bits = int(hi).bit_length()
    d = np.zeros(xs.shape, dtype=np.int64)
    s = 1 << (bits - 1)
    while s > 0:
        rx = ((xs & s) > 0).astype(np.int64)
        ry = ((ys & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        flip = (ry == 0) & (rx == 1)
        xs = np.where(flip, s - 1 - xs, xs)
        ys = np.where(flip, s - 1 - ys, ys)
        swap = ry == 0
        xs, ys = np.where(swap, ys, xs), np.where(swap, xs, ys)
        s >>= 1
    return d


def _chain_orientation(cur: tuple[int, int] | None, seg: np.ndarray) -> np.ndarray:
    """Orient a sub-order so it chains cheaply onto the current endpoint."""
    if cur is None or seg.shape[0] < 2:
        return seg
    d_fwd = abs(seg[0, 0] - cur[0]) + abs(seg[0, 1] - cur[1])
    d_rev = abs(seg[-1, 0] - cur[0]) + abs(seg[-1, 1] - cur[1])
    return seg if d_fwd <= d_rev else seg[::-1]


def connected_set_tour(v: PointSet, box_exact_cap: int = 12) -> TspResult:
    """Visiting tour of a 4-connected set built from a covering-box walk.

    The covering boxes' perimeters are walked by a doubled depth-first
    traversal; each box contributes a sub-path over its members at first
    visit; the resulting visit order is then shortcut to L1 gaps.
    """
    pts = _points_array(v)
    _require_connected(pts)
    n = pts.shape[0]
    if n == 1:
        return TspResult(0, pts, exact=False)
    ps = v if isinstance(v, PointSet) else PointSet.from_arrays(pts[:, 0], pts[:, 1])
    nb = len(ps.boundary())
    c = int(round((4.0 * n / max(nb, 1)) ** (1.0 / 3.0))) - 1
    c = max(2, min(c, 64))
    x0, y0 = int(pts[:, 0].min()), int(pts[:, 1].min())

    by_box: dict[tuple[int, int], list[int]] = {}
    for i, (x, y) in enumerate(pts):
        by_box.setdefault(((int(x) - x0) // c, (int(y) - y0) // c), []).append(i)

    ring_owner: dict[tuple[int, int], tuple[int, int]] = {}
    for b in by_box:
        for cell in _box_ring(b[0], b[1], c, x0, y0):
            ring_owner[cell] = b

    # doubled DFS over the perimeter union
    start = min(ring_owner)
    walk_boxes: list[tuple[int, int]] = []
    seen_cells = {start}
    seen_boxes: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = [start]
    while stack:
        cell = stack.pop()
        b = ring_owner[cell]
        if b not in seen_boxes:
            seen_boxes.add(b)
            walk_boxes.append(b)
        x, y = cell
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt in ring_owner and nxt not in seen_cells:
                seen_cells.add(nxt)
                stack.append(nxt)

    chunks: list[np.ndarray] = []
    cur = None
    for b in walk_boxes:
        sub = pts[by_box[b]]
        if sub.shape[0] == c * c:
            ys = np.where(sub[:, 0] % 2 == 0, sub[:, 1], -sub[:, 1])
            sub = sub[np.lexsort((ys, sub[:, 0]))]
        else:
            sub = improved_heuristic_order(sub, exact_cap=box_exact_cap)
        sub = _chain_orientation(cur, sub)
        chunks.append(sub)
        cur = (int(sub[-1, 0]), int(sub[-1, 1]))
    order = polish_order(np.concatenate(chunks, axis=0))
    return TspResult(order_length(order), order, exact=False)


# ---------------------------------------------------------------------------
# box decomposition for diluted ranges


def box_tsp_diluted(
    diluted: PointSet,
    range_set: PointSet,
    c: int,
    box_exact_cap: int = 12,
) -> TspResult:
    """Tour of a diluted range built from per-box sub-tours.

    Boxes of side ``c`` tile the range's bounding box; every box holding
    diluted points contributes a sub-tour (exact below ``box_exact_cap``,
    otherwise nearest-neighbour plus 2-opt), chained in box scan order
    with greedy orientation and finally shortcut.
    """
    if c < 2:
        raise DomainError("box side must be >= 2")
    if not np.all(np.isin(diluted.keys, range_set.keys, assume_unique=True)):
        raise DomainError("diluted set must be a subset of the range")
    rng_pts = _points_array(range_set)
    if rng_pts.shape[0] == 0:
        return TspResult(0, np.empty((0, 2), dtype=np.int64), exact=False)
    x0, y0 = int(rng_pts[:, 0].min()), int(rng_pts[:, 1].min())
    if len(diluted) == 0:
        anchor = rng_pts[:1]
        return TspResult(0, anchor, exact=False)

    dil_pts = _points_array(diluted)
    bx = (dil_pts[:, 0] - x0) // c
    by = (dil_pts[:, 1] - y0) // c

    rbx = (rng_pts[:, 0] - x0) // c
    rby = (rng_pts[:, 1] - y0) // c
    visited_boxes, counts = np.unique(
        np.stack([rbx, rby], axis=1), axis=0, return_counts=True
    )
    full = {
        (int(b[0]), int(b[1]))
        for b, cnt in zip(visited_boxes, counts)
        if cnt == c * c
    }

    # locality-preserving scan of boxes holding diluted points: greedy
    # nearest box while the count is small, else Hilbert order; then a
    # windowed polish of the box-centre sequence
    box_ids = np.stack([bx, by], axis=1)
    uniq_boxes = np.unique(box_ids, axis=0)
    if 1 < uniq_boxes.shape[0] <= 2048:
        order = _nearest_neighbour(_l1_matrix(uniq_boxes))
        uniq_boxes = uniq_boxes[order]
    else:
        uniq_boxes = uniq_boxes[
            np.argsort(hilbert_index(uniq_boxes[:, 0], uniq_boxes[:, 1]))
        ]
    if uniq_boxes.shape[0] > 3:
        augmented = np.concatenate(
            [uniq_boxes, np.arange(uniq_boxes.shape[0])[:, None]], axis=1
        )
        uniq_boxes = polish_order(augmented, window=12, rounds=4)[:, :2]

    groups: dict[tuple[int, int], list[int]] = {}
    for i, b in enumerate(box_ids):
        groups.setdefault((int(b[0]), int(b[1])), []).append(i)

    chunks = []
    cur = None
    full_total = 0
    other_total = 0
    connect_total = 0
    for b in uniq_boxes:
        key = (int(b[0]), int(b[1]))
        sub = improved_heuristic_order(pts=dil_pts[groups[key]], exact_cap=box_exact_cap)
        sub = _chain_orientation(cur, sub)
        sub_len = order_length(sub)
        if key in full:
            full_total += sub_len
        else:
            other_total += sub_len
        if cur is not None:
            connect_total += abs(int(sub[0, 0]) - cur[0]) + abs(int(sub[0, 1]) - cur[1])
        cur = (int(sub[-1, 0]), int(sub[-1, 1]))
        chunks.append(sub)
    order = polish_order(np.concatenate(chunks, axis=0))
    stats = BoxTspStats(
        box_side=c,
        n_boxes_visited=int(visited_boxes.shape[0]),
        n_boxes_full=len(full),
        full_subtour_total=full_total,
        other_subtour_total=other_total,
        connect_total=connect_total,
        range_size=len(range_set),
        range_boundary_size=len(range_set.boundary()),
    )
    return TspResult(order_length(order), order, exact=False, stats=stats)


# ---------------------------------------------------------------------------
# exact shortest lamp-writing path inside a small box


def s_path_tsp_exact(
    target,
    gens,
    cap: int = 2_000_000,
    margin: int | None = None,
) -> int:
    """Length of the shortest generator path writing ``target`` exactly.

    The path starts at any position with all lamps off and must end with
    lamp configuration equal to ``target``.  Uniform-cost search over
    (position, configuration) states; positions and lamp sites are
    confined to the target's bounding box inflated by ``margin``.
    """
    items = sorted(target.items())
    moves = []
    max_jump = 1
    for g in gens:
        for h in (g, g.inverse()):
            lamp_items = tuple(sorted(h.lamps.items()))
            moves.append(((h.position.x, h.position.y), lamp_items))
            max_jump = max(
                max_jump,
                abs(h.position.x) + abs(h.position.y),
                max(
                    (abs(p.x) + abs(p.y) for p, _ in lamp_items),
                    default=0,
                ),
            )
    if not items:
        return 0
    lamp_group = target.group
    xs = [p.x for p, _ in items]
    ys = [p.y for p, _ in items]
    m = margin if margin is not None else 2 * max_jump
    lox, hix = min(xs) - m, max(xs) + m
    loy, hiy = min(ys) - m, max(ys) + m
    sites = [(x, y) for x in range(lox, hix + 1) for y in range(loy, hiy + 1)]
    site_index = {s: i for i, s in enumerate(sites)}
    n_sites = len(sites)
    if n_sites > 40 or n_sites * (lamp_group.order**n_sites) > cap:
        raise ResourceLimitError(
            f"state budget exceeded: {n_sites} sites, cap {cap}"
        )
    target_vec = [0] * n_sites
    for p, v in items:
        target_vec[site_index[(p.x, p.y)]] = v
    target_vec = tuple(target_vec)
    empty = tuple([0] * n_sites)

    frontier = [((x, y), empty) for x in range(lox, hix + 1) for y in range(loy, hiy + 1)]
    seen = set(frontier)
    depth = 0
    while frontier:
        nxt = []
        for pos, cfg in frontier:
            for (dx, dy), lamp_items in moves:
                npos = (pos[0] + dx, pos[1] + dy)
                if not (lox <= npos[0] <= hix and loy <= npos[1] <= hiy):
                    continue
                ncfg = list(cfg)
                ok = True
                for site, val in lamp_items:
                    abs_site = (site.x + pos[0], site.y + pos[1])
                    idx = site_index.get(abs_site)
                    if idx is None:
                        ok = False
                        break
                    ncfg[idx] = lamp_group.op(ncfg[idx], val)
                if not ok:
                    continue
                tcfg = tuple(ncfg)
                if tcfg == target_vec:
                    return depth + 1
                state = (npos, tcfg)
                if state not in seen:
                    seen.add(state)
                    nxt.append(state)
                    if len(seen) > cap:
                        raise ResourceLimitError("state budget exceeded during search")
        frontier = nxt
        depth += 1
    raise DomainError("target configuration unreachable with the given generators")


# ---------------------------------------------------------------------------
# CSV interchange for point sets


def save_point_set(points: PointSet, path) -> None:
    with open(path, "w") as fh:
        for p in points:
            fh.write(f"{p.x},{p.y}\n")


def load_point_set(path) -> PointSet:
    pts = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x, y = line.split(",")
            pts.append((int(x), int(y)))
    return PointSet(pts)
