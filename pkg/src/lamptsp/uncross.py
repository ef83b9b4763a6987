"""Uncrossing and perimeter joining for path collections in a square box.

Paths enter in two flavours: plain lattice paths, and generator paths in
a wreath product whose projections live in the box.  A pair of paths with
endpoints on the box boundary "essentially crosses" when one pair of
endpoints separates the other on the boundary circle.  The machinery
here removes all essential crossings by endpoint surgery at intersection
points and then joins the resulting collection into a single path using
boundary arcs, with an explicit budget on the added arc length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError
from .lattice import Point
from .tsp import GridPath, staircase
from .wreath import GeneratingSet, LampConfig, SPath, WreathElement

# ---------------------------------------------------------------------------
# the box and its boundary circle


class BoxDomain:
    """Axis-aligned C x C box of lattice points with a clockwise boundary."""

    def __init__(self, corner: tuple[int, int], side: int):
        if side < 2:
            raise DomainError("box side must be >= 2")
        self.corner = Point(corner[0], corner[1])
        self.side = int(side)
        cx, cy, c = self.corner.x, self.corner.y, self.side
        cyc: list[Point] = []
        for y in range(cy, cy + c):
            cyc.append(Point(cx, y))
        for x in range(cx + 1, cx + c):
            cyc.append(Point(x, cy + c - 1))
        for y in range(cy + c - 2, cy - 1, -1):
            cyc.append(Point(cx + c - 1, y))
        for x in range(cx + c - 2, cx, -1):
            cyc.append(Point(x, cy))
        self.boundary_cycle = cyc
        self._index = {p: i for i, p in enumerate(cyc)}

    @property
    def perimeter(self) -> int:
        return len(self.boundary_cycle)  # 4C - 4

    def contains(self, p: tuple[int, int]) -> bool:
        return (
            self.corner.x <= p[0] < self.corner.x + self.side
            and self.corner.y <= p[1] < self.corner.y + self.side
        )

    def boundary_index(self, p: tuple[int, int]) -> int:
        idx = self._index.get(Point(p[0], p[1]))
        if idx is None:
            raise DomainError(f"{p} is not on the box boundary")
        return idx

    def project_to_boundary(self, p: tuple[int, int]) -> Point:
        """Nearest boundary point in L1; ties resolve to the smallest
        clockwise index."""
        best = None
        best_key = None
        for i, q in enumerate(self.boundary_cycle):
            key = (abs(q.x - p[0]) + abs(q.y - p[1]), i)
            if best_key is None or key < best_key:
                best_key = key
                best = q
        return best

    def arc_contains(self, x: int, start: int, end: int) -> bool:
        """Is index x strictly inside the clockwise open arc start -> end?"""
        n = self.perimeter
        span = (end - start) % n
        off = (x - start) % n
        return 0 < off < span


# ---------------------------------------------------------------------------
# path helpers covering both flavours


def _is_spath(p) -> bool:
    return isinstance(p, SPath)


def path_endpoints(p) -> tuple[Point, Point]:
    if _is_spath(p):
        return p.projected_start(), p.projected_end()
    return p.start(), p.end()


def path_length(p) -> int:
    return len(p) if _is_spath(p) else p.length


def reverse_any(p):
    return p.reversed()


def concat_paths(p1, p2):
    """Concatenate; p2 must start where p1 ends (projected for S-paths)."""
    a, b = path_endpoints(p1)[1], path_endpoints(p2)[0]
    if a != b:
        raise DomainError("paths do not share the gluing endpoint")
    if _is_spath(p1):
        return SPath(p1.start, p1.moves + p2.moves, p1.gens)
    verts = list(map(tuple, p1.vertices)) + list(map(tuple, p2.vertices[1:]))
    return GridPath(verts)


def grid_image(p) -> set[tuple[int, int]]:
    return {(int(v[0]), int(v[1])) for v in p.vertices}


def projected_trace(p) -> list[tuple[int, int]]:
    """Projected vertex sequence of either path flavour."""
    if _is_spath(p):
        return [(e.position.x, e.position.y) for e in p.elements()]
    return [(int(v[0]), int(v[1])) for v in p.vertices]


def hat_expansion(p) -> tuple[list[tuple[int, int]], list[int]]:
    """Staircase-interpolated projection and, per hat vertex, the index of
    the last real vertex at or before it."""
    trace = projected_trace(p)
    hat = [trace[0]]
    owner = [0]
    for i in range(1, len(trace)):
        seg = staircase(trace[i - 1], trace[i])
        for j, v in enumerate(seg):
            hat.append(v)
            owner.append(i if j == len(seg) - 1 else i - 1)
        if not seg:  # stationary move (pure lamp action)
            pass
    return hat, owner


# ---------------------------------------------------------------------------
# essential crossings


def essential_crossing(p1, p2, d: BoxDomain) -> bool:
    a1, b1 = path_endpoints(p1)
    a2, b2 = path_endpoints(p2)
    if a1 == b1 or a2 == b2:
        return False  # loops never cross essentially
    i_a1, i_b1 = d.boundary_index(a1), d.boundary_index(b1)
    i_a2, i_b2 = d.boundary_index(a2), d.boundary_index(b2)
    if len({i_a1, i_b1, i_a2, i_b2}) < 4:
        raise DomainError("paths share endpoints; normalize the collection first")
    return d.arc_contains(i_a2, i_a1, i_b1) != d.arc_contains(i_b2, i_a1, i_b1)


# ---------------------------------------------------------------------------
# collections


@dataclass
class PathCollection:
    paths: list = field(default_factory=list)

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def total_length(self) -> int:
        return sum(path_length(p) for p in self.paths)

    def total_tau(self) -> LampConfig:
        taus = [p.tau() for p in self.paths if _is_spath(p)]
        if not taus:
            raise DomainError("tau is defined for generator-path collections")
        out = taus[0]
        for t in taus[1:]:
            out = out.combine(t)
        return out

    def image(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for p in self.paths:
            out |= grid_image(p)
        return out


def _as_list(c) -> list:
    return list(c.paths) if isinstance(c, PathCollection) else list(c)


def normalize_endpoints(c) -> PathCollection:
    """Concatenate paths sharing endpoints until all endpoint coincidences
    are gone; surviving loops keep their anchors."""
    paths = _as_list(c)
    changed = True
    while changed:
        changed = False
        n = len(paths)
        for i in range(n):
            if changed:
                break
            for j in range(i + 1, n):
                pi, pj = paths[i], paths[j]
                ai, bi = path_endpoints(pi)
                aj, bj = path_endpoints(pj)
                if ai == bi and aj == bj:
                    if ai == aj:  # two loops on one anchor
                        merged = concat_paths(pi, pj)
                    else:
                        continue
                elif bi == aj:
                    merged = concat_paths(pi, pj)
                elif bi == bj:
                    merged = concat_paths(pi, reverse_any(pj))
                elif ai == aj:
                    merged = concat_paths(reverse_any(pi), pj)
                elif ai == bj:
                    merged = concat_paths(pj, pi)
                else:
                    continue
                paths = [p for k, p in enumerate(paths) if k not in (i, j)]
                paths.append(merged)
                changed = True
                break
    return PathCollection(paths)


def project_endpoints(c, d: BoxDomain, max_distance: int | None = None) -> PathCollection:
    """Move generator-path endpoints onto the boundary cycle.

    Each path gains a lamp-free connector from the nearest boundary point
    to its start, and symmetrically at its end.
    """
    out = []
    for p in _as_list(c):
        if not _is_spath(p):
            out.append(p)
            continue
        a, b = path_endpoints(p)
        pa = a if a in d._index else d.project_to_boundary(a)
        pb = b if b in d._index else d.project_to_boundary(b)
        if max_distance is not None:
            if (
                abs(pa.x - a.x) + abs(pa.y - a.y) > max_distance
                or abs(pb.x - b.x) + abs(pb.y - b.y) > max_distance
            ):
                raise DomainError("endpoint too far from the boundary to project")
        moves = p.moves
        start = p.start
        if pa != a:
            conn = translation_moves(p.gens, (a.x - pa.x, a.y - pa.y))
            start = WreathElement(pa, p.start.lamps)
            moves = conn + moves
        if pb != b:
            conn = translation_moves(p.gens, (pb.x - b.x, pb.y - b.y))
            moves = moves + conn
        out.append(SPath(start, moves, p.gens))
    return PathCollection(out)


# lamp-free translation words, cached per generating set
_conn_cache: dict = {}


def translation_moves(gens: GeneratingSet, dpos: tuple[int, int]) -> tuple:
    """Shortest generator word for the pure translation (dpos, no lamps)."""
    key = (id(gens), dpos)
    if key in _conn_cache:
        return _conn_cache[key]
    if dpos == (0, 0):
        _conn_cache[key] = ()
        return ()
    target = WreathElement.make(gens.group, dpos)
    cap = 4 * (abs(dpos[0]) + abs(dpos[1])) + 8
    # breadth-first search recording parent moves
    moves = gens.moves()
    start = WreathElement.identity(gens.group)
    key0 = (start.position, start.lamps)
    parents: dict = {key0: None}
    frontier = [(start, key0)]
    tkey = (target.position, target.lamps)
    found = None
    depth = 0
    while frontier and found is None and depth < cap:
        nxt = []
        for e, ek in frontier:
            for h, idx, inv in moves:
                ne = e * h
                nk = (ne.position, ne.lamps)
                if nk in parents:
                    continue
                parents[nk] = (ek, (idx, inv))
                if nk == tkey:
                    found = nk
                    break
                nxt.append((ne, nk))
            if found:
                break
        frontier = nxt
        depth += 1
    if found is None:
        raise DomainError(f"no lamp-free word realizes translation {dpos}")
    seq = []
    k = found
    while parents[k] is not None:
        k, mv = parents[k]
        seq.append(mv)
    seq.reverse()
    out = tuple(seq)
    _conn_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# the uncrossing surgery


def _split_grid(p: GridPath, o: tuple[int, int]) -> int:
    verts = list(map(tuple, p.vertices))
    try:
        return verts.index((o[0], o[1]))
    except ValueError:
        raise DomainError(f"{o} does not lie on the path") from None


def uncross_pair(p1, p2, o: tuple[int, int]):
    """Swap tails at the meeting point o; endpoints become (A1,B2), (A2,B1).

    Grid paths split exactly at o.  Generator paths split at the last
    real vertex each projection has at or before o along its staircase
    interpolation, joined by a lamp-free connector, so the two outputs
    partition every original move and the combined lamp change is kept.
    """
    if not _is_spath(p1):
        i1 = _split_grid(p1, o)
        i2 = _split_grid(p2, o)
        v1 = list(map(tuple, p1.vertices))
        v2 = list(map(tuple, p2.vertices))
        q1 = GridPath(v1[: i1 + 1] + v2[i2 + 1 :])
        q2 = GridPath(v2[: i2 + 1] + v1[i1 + 1 :])
        return q1, q2

    hat1, own1 = hat_expansion(p1)
    hat2, own2 = hat_expansion(p2)
    o = (o[0], o[1])
    if o not in hat1 or o not in hat2:
        raise DomainError(f"{o} is not a meeting point of the two projections")
    r1 = own1[hat1.index(o)]
    r2 = own2[hat2.index(o)]
    y1 = projected_trace(p1)[r1]
    y2 = projected_trace(p2)[r2]
    conn12 = translation_moves(p1.gens, (y2[0] - y1[0], y2[1] - y1[1]))
    conn21 = translation_moves(p1.gens, (y1[0] - y2[0], y1[1] - y2[1]))
    q1 = SPath(p1.start, p1.moves[:r1] + conn12 + p2.moves[r2:], p1.gens)
    q2 = SPath(p2.start, p2.moves[:r2] + conn21 + p1.moves[r1:], p1.gens)
    return q1, q2


def _first_meeting_point(p1, p2):
    """First point of p1's (projected) traversal lying on p2's trace."""
    if _is_spath(p1):
        hat1, _ = hat_expansion(p1)
        hat2, _ = hat_expansion(p2)
        other = set(hat2)
        for v in hat1:
            if v in other:
                return v
        return None
    other = grid_image(p2)
    for v in map(tuple, p1.vertices):
        if v in other:
            return v
    return None


def _find_good(paths, d: BoxDomain) -> int | None:
    """Index of a path one of whose boundary arcs holds no other endpoint."""
    marks = []
    for p in paths:
        a, b = path_endpoints(p)
        marks.append((d.boundary_index(a), d.boundary_index(b)))
    for i, p in enumerate(paths):
        ia, ib = marks[i]
        if ia == ib:
            continue  # loops handled separately
        others = [m for j, m in enumerate(marks) if j != i]
        side1 = any(
            d.arc_contains(x, ia, ib) for m in others for x in m
        )
        side2 = any(
            d.arc_contains(x, ib, ia) for m in others for x in m
        )
        if not side1 or not side2:
            return i
    return None


def uncross_all(c, d: BoxDomain) -> tuple[PathCollection, int]:
    """Remove all essential crossings.

    Follows the good-path induction: a path with an endpoint-free arc is
    retired untouched; otherwise the nearest other endpoint along the
    chosen path's clockwise arc determines the partner for one surgery,
    which creates a retirable path.  The number of surgeries is at most
    the number of paths.
    """
    active = _as_list(c)
    out: list = []
    loops = [p for p in active if path_endpoints(p)[0] == path_endpoints(p)[1]]
    active = [p for p in active if path_endpoints(p)[0] != path_endpoints(p)[1]]
    count = 0
    guard = 4 * len(active) * len(active) + 16
    while active:
        guard -= 1
        if guard < 0:
            raise RuntimeError("uncrossing failed to terminate")
        g = _find_good(active, d)
        if g is not None:
            out.append(active.pop(g))
            continue
        p = active[0]
        a, b = path_endpoints(p)
        ia, ib = d.boundary_index(a), d.boundary_index(b)
        # endpoints of other paths sorted by clockwise distance from A
        cands = []
        for j in range(1, len(active)):
            qa, qb = path_endpoints(active[j])
            for e in (qa, qb):
                ie = d.boundary_index(e)
                if d.arc_contains(ie, ia, ib):
                    cands.append(((ie - ia) % d.perimeter, j, e))
        cands.sort()
        done = False
        for _, j, e in cands:
            q = active[j]
            if path_endpoints(q)[1] != e:
                q = reverse_any(q)
            o = _first_meeting_point(p, q)
            if o is None:
                continue
            n1, n2 = uncross_pair(p, q, o)
            rest = [active[k] for k in range(1, len(active)) if k != j]
            active = [n1, n2] + rest
            count += 1
            done = True
            break
        if not done:
            # no partner intersects: no essential crossings remain for p
            out.append(active.pop(0))
    result = PathCollection(out + loops)
    return result, count


# ---------------------------------------------------------------------------
# joining along the perimeter


@dataclass
class _Edge:
    eid: int
    u: int
    v: int
    kind: str  # "chord" | "loop" | "arc" | "arc_cyc"
    payload: object = None
    used: bool = False


def _euler_walk(edges: list[_Edge], start: int) -> list[tuple[_Edge, int]]:
    """Hierholzer walk; returns (edge, node arrived at) pairs from start."""
    adj: dict[int, list[_Edge]] = {}
    for e in edges:
        adj.setdefault(e.u, []).append(e)
        if e.v != e.u:
            adj.setdefault(e.v, []).append(e)
    for v in adj:
        adj[v].sort(key=lambda e: (e.kind != "chord", e.eid), reverse=True)
    stack: list[tuple[int, _Edge | None]] = [(start, None)]
    popped: list[tuple[int, _Edge | None]] = []
    while stack:
        v, _ = stack[-1]
        lst = adj.get(v, [])
        while lst and lst[-1].used:
            lst.pop()
        if lst:
            e = lst.pop()
            e.used = True
            w = e.v if e.u == v else e.u
            stack.append((w, e))
        else:
            popped.append(stack.pop())
    popped.reverse()
    return [(e, node) for node, e in popped[1:]]


def join_noncrossing(c, d: BoxDomain):
    """Join a crossing-free collection into one path via boundary arcs.

    Grid collections: the added arc length is at most 1.5 x perimeter,
    by choosing the cheaper alternate pairing of boundary gaps and, only
    when the pieces remain disconnected, walking the full boundary once.
    Generator-path collections get lamp-free connector words along the
    same arcs.
    """
    paths = _as_list(c)
    if not paths:
        raise DomainError("nothing to join")
    spath_mode = _is_spath(paths[0])
    for i, p in enumerate(paths):
        for q in paths[i + 1 :]:
            if essential_crossing(p, q, d):
                raise DomainError("collection still has an essential crossing")
    if len(paths) == 1:
        return paths[0]

    # graph nodes: boundary indices carrying endpoints or loop anchors
    chords = []
    loop_edges = []
    eid = 0
    node_set = set()
    for p in paths:
        a, b = path_endpoints(p)
        ia, ib = d.boundary_index(a), d.boundary_index(b)
        node_set |= {ia, ib}
        if ia == ib:
            loop_edges.append(_Edge(eid, ia, ib, "loop", p))
        else:
            chords.append(_Edge(eid, ia, ib, "chord", p))
        eid += 1
    nodes = sorted(node_set)

    # odd-degree nodes are exactly the non-loop endpoints
    t_nodes = sorted({e.u for e in chords} | {e.v for e in chords})
    arc_candidates = []
    if t_nodes:
        m = len(t_nodes)
        for phase in (0, 1):
            pairs = [
                (t_nodes[k % m], t_nodes[(k + 1) % m]) for k in range(phase, m, 2)
            ]
            if 2 * len(pairs) != m:
                continue
            by_gap = sorted(pairs, key=lambda uv: (uv[1] - uv[0]) % d.perimeter)
            # leave the widest gap unpatched: its ends become the walk ends
            kept = by_gap[:-1]
            cost = sum((v - u) % d.perimeter for u, v in kept)
            arc_candidates.append((cost, kept))
        arc_candidates.sort(key=lambda t: t[0])

    def build(arcs, add_cycle: bool):
        edges = [
            _Edge(e.eid, e.u, e.v, e.kind, e.payload) for e in chords + loop_edges
        ]
        next_id = eid
        for u, v in arcs:
            edges.append(_Edge(next_id, u, v, "arc", None))
            next_id += 1
        if add_cycle:
            ring = sorted(nodes)
            for i, u in enumerate(ring):
                v = ring[(i + 1) % len(ring)]
                if v == u:
                    continue
                edges.append(_Edge(next_id, u, v, "arc_cyc", None))
                next_id += 1
        return edges

    def connected(edges):
        adj: dict[int, set[int]] = {}
        for e in edges:
            adj.setdefault(e.u, set()).add(e.v)
            adj.setdefault(e.v, set()).add(e.u)
        seen: set[int] = set()
        stack = [min(adj)]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj[v] - seen)
        return seen == set(adj)

    chosen = None
    for _, arcs in arc_candidates:
        edges = build(arcs, add_cycle=False)
        if connected(edges):
            chosen = edges
            break
    if chosen is None:
        chosen = build(arc_candidates[0][1] if arc_candidates else [], add_cycle=True)

    deg: dict[int, int] = {}
    for e in chosen:
        deg[e.u] = deg.get(e.u, 0) + 1
        deg[e.v] = deg.get(e.v, 0) + 1
    odd = sorted(v for v, k in deg.items() if k % 2 == 1)
    start = odd[0] if odd else min(deg)
    walk = _euler_walk(chosen, start)

    def arc_run(u: int, v: int) -> list[Point]:
        """Boundary run from index u to v (shorter way round), excluding u."""
        n = d.perimeter
        fwd = (v - u) % n
        bwd = (u - v) % n
        step = 1 if fwd <= bwd else -1
        run = []
        i = u
        while i != v:
            i = (i + step) % n
            run.append(d.boundary_cycle[i])
        return run

    cur_idx = start
    if spath_mode:
        gens = paths[0].gens
        moves: tuple = ()
        for e, to_node in walk:
            frm, cur_idx = cur_idx, to_node
            if e.kind in ("arc", "arc_cyc"):
                prev = d.boundary_cycle[frm]
                for q in arc_run(frm, to_node):
                    moves += translation_moves(gens, (q.x - prev.x, q.y - prev.y))
                    prev = q
            else:
                p = e.payload
                if path_endpoints(p)[0] != d.boundary_cycle[frm]:
                    p = reverse_any(p)
                moves += p.moves
        start_el = WreathElement(d.boundary_cycle[start], LampConfig(gens.group))
        return SPath(start_el, moves, gens)

    verts: list[tuple[int, int]] = [tuple(d.boundary_cycle[start])]
    for e, to_node in walk:
        frm, cur_idx = cur_idx, to_node
        if e.kind in ("arc", "arc_cyc"):
            verts.extend(tuple(q) for q in arc_run(frm, to_node))
        else:
            p = e.payload
            if path_endpoints(p)[0] != d.boundary_cycle[frm]:
                p = reverse_any(p)
            verts.extend(map(tuple, p.vertices[1:]))
    return GridPath(verts)
