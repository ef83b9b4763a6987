"""Exact arithmetic in wreath products of lamp groups over Z and Z^2.

Elements are pairs (walker position, finitely supported lamp assignment);
multiplication translates the right factor's lamps by the left factor's
position.  Lamp groups are Z/2Z, an arbitrary finite group given by its
multiplication table, or Z.  A breadth-first search over the Cayley
graph serves as the word-length oracle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    ConfigurationError,
    DomainError,
    ResourceLimitError,
    UnsupportedOperationError,
)
from .lattice import Point

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# lamp groups


class LampGroup:
    """Abelian-or-not lamp value group; identity is always 0."""

    order: int  # 0 means infinite (Z)

    def op(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        raise NotImplementedError

    @property
    def involutive(self) -> bool:
        """True iff every element squares to the identity."""
        if self.order == 0:
            return False
        return all(self.op(a, a) == 0 for a in range(self.order))

    def elements(self) -> range:
        if self.order == 0:
            raise UnsupportedOperationError("infinite lamp group")
        return range(self.order)


class CyclicLampGroup(LampGroup):
    def __init__(self, order: int):
        if order < 1:
            raise ConfigurationError("cyclic lamp group needs order >= 1")
        self.order = order

    def op(self, a, b):
        return (a + b) % self.order

    def inv(self, a):
        return (-a) % self.order

    def __repr__(self):
        return f"CyclicLampGroup({self.order})"


class IntegerLampGroup(LampGroup):
    """Lamp values in Z; word length of a value is its absolute value."""

    order = 0

    def op(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def __repr__(self):
        return "IntegerLampGroup()"


class TableLampGroup(LampGroup):
    """Finite group from an explicit multiplication table, identity index 0."""

    def __init__(self, table: Sequence[Sequence[int]]):
        m = len(table)
        self.table = [list(row) for row in table]
        self.order = m
        if any(len(row) != m for row in self.table):
            raise ConfigurationError("multiplication table must be square")
        for a in range(m):
            if self.table[0][a] != a or self.table[a][0] != a:
                raise ConfigurationError("index 0 must be the identity")
        self._inv = [None] * m
        for a in range(m):
            for b in range(m):
                if self.table[a][b] == 0:
                    self._inv[a] = b
        if any(v is None for v in self._inv):
            raise ConfigurationError("table has an element without inverse")
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    if (
                        self.table[self.table[a][b]][c]
                        != self.table[a][self.table[b][c]]
                    ):
                        raise ConfigurationError("table is not associative")

    def op(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def __repr__(self):
        return f"TableLampGroup(order={self.order})"


Z2_LAMPS = CyclicLampGroup(2)


def parse_lamp_table(text: str) -> TableLampGroup:
    """Plain-text table format: first line the order m, then m rows of m indices."""
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise ConfigurationError("empty lamp table")
    m = int(lines[0])
    if len(lines) != m + 1:
        raise ConfigurationError(f"expected {m} table rows, got {len(lines) - 1}")
    rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
    return TableLampGroup(rows)


def load_lamp_table(path) -> TableLampGroup:
    with open(path) as fh:
        return parse_lamp_table(fh.read())


# ---------------------------------------------------------------------------
# lamp configurations and wreath elements


class LampConfig:
    """Finite-support map from lattice points to non-identity lamp values."""

    __slots__ = ("group", "_items", "_hash")

    def __init__(self, group: LampGroup, assignment=None):
        self.group = group
        items = {}
        if assignment:
            for p, v in dict(assignment).items():
                if v != 0:
                    items[Point(p[0], p[1])] = v
        self._items = items
        self._hash = None

    def items(self):
        return sorted(self._items.items())

    def get(self, p, default=0):
        return self._items.get(Point(p[0], p[1]), default)

    def support(self) -> list[Point]:
        return sorted(self._items)

    def __len__(self):
        return len(self._items)

    def __bool__(self):
        return bool(self._items)

    def __eq__(self, other):
        return (
            isinstance(other, LampConfig)
            and self.group is other.group
            and self._items == other._items
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._items.items()))
        return self._hash

    def __repr__(self):
        return f"LampConfig({dict(self.items())})"

    def translate(self, dz: tuple[int, int]) -> "LampConfig":
        cfg = LampConfig(self.group)
        cfg._items = {
            Point(p.x + dz[0], p.y + dz[1]): v for p, v in self._items.items()
        }
        return cfg

    def combine(self, other: "LampConfig") -> "LampConfig":
        """Pointwise lamp-group product self(x) * other(x)."""
        if self.group is not other.group:
            raise TypeError("lamp configurations over different lamp groups")
        items = dict(self._items)
        for p, v in other._items.items():
            nv = self.group.op(items.get(p, 0), v)
            if nv == 0:
                items.pop(p, None)
            else:
                items[p] = nv
        cfg = LampConfig(self.group)
        cfg._items = items
        return cfg

    def inverse_pointwise(self) -> "LampConfig":
        cfg = LampConfig(self.group)
        cfg._items = {p: self.group.inv(v) for p, v in self._items.items()}
        return cfg

    def difference(self, other: "LampConfig") -> "LampConfig":
        """Pointwise self(x) * other(x)^-1 (the net change from other to self)."""
        return self.combine(other.inverse_pointwise())


@dataclass(frozen=True)
class WreathElement:
    position: Point
    lamps: LampConfig

    @classmethod
    def identity(cls, group: LampGroup) -> "WreathElement":
        return cls(Point(0, 0), LampConfig(group))

    @classmethod
    def make(cls, group: LampGroup, position=(0, 0), lamps=None) -> "WreathElement":
        return cls(Point(position[0], position[1]), LampConfig(group, lamps))

    @property
    def group(self) -> LampGroup:
        return self.lamps.group

    def __mul__(self, other: "WreathElement") -> "WreathElement":
        if self.group is not other.group:
            raise TypeError("cannot multiply elements over different lamp groups")
        pos = Point(self.position.x + other.position.x, self.position.y + other.position.y)
        lamps = self.lamps.combine(other.lamps.translate(self.position))
        return WreathElement(pos, lamps)

    def inverse(self) -> "WreathElement":
        neg = Point(-self.position.x, -self.position.y)
        return WreathElement(
            neg, self.lamps.inverse_pointwise().translate(neg)
        )

    def is_identity(self) -> bool:
        return self.position == Point(0, 0) and not self.lamps


def multiply(g: WreathElement, h: WreathElement) -> WreathElement:
    return g * h


def invert(g: WreathElement) -> WreathElement:
    return g.inverse()


# ---------------------------------------------------------------------------
# generating sets


class GeneratingSet:
    def __init__(self, generators: Iterable[WreathElement], labels=None):
        self.elements = tuple(generators)
        if not self.elements:
            raise ConfigurationError("generating set cannot be empty")
        g0 = self.elements[0].group
        if any(e.group is not g0 for e in self.elements):
            raise ConfigurationError("generators over mixed lamp groups")
        self.labels = tuple(labels) if labels else tuple(
            f"g{i}" for i in range(len(self.elements))
        )
        if len(self.labels) != len(self.elements):
            raise ConfigurationError("labels do not match generators")

    @property
    def group(self) -> LampGroup:
        return self.elements[0].group

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def moves(self) -> list[tuple[WreathElement, int, bool]]:
        """Generators and their inverses as (element, index, inverted)."""
        out = []
        seen = set()
        for i, g in enumerate(self.elements):
            for h, inv in ((g, False), (g.inverse(), True)):
                key = (h.position, h.lamps)
                if key in seen:
                    continue
                seen.add(key)
                out.append((h, i, inv))
        return out

    def is_symmetric(self) -> bool:
        elems = {(e.position, e.lamps) for e in self.elements}
        return all(
            (e.inverse().position, e.inverse().lamps) in elems for e in self.elements
        )


def standard_lamplighter_gens() -> GeneratingSet:
    """s1 = ((1,0), no lamps), s2 = ((0,1), no lamps), delta = toggle at origin."""
    return GeneratingSet(
        [
            WreathElement.make(Z2_LAMPS, (1, 0)),
            WreathElement.make(Z2_LAMPS, (0, 1)),
            WreathElement.make(Z2_LAMPS, (0, 0), {(0, 0): 1}),
        ],
        labels=("s1", "s2", "delta"),
    )


def sws_line_gens(lamp_group: LampGroup) -> GeneratingSet:
    """Move-and-switch set on the line: step +1 while adjusting the lamps
    at the old and new positions, together with all inverses."""
    if lamp_group.order == 0:
        raise ConfigurationError("finite lamp group required")
    gens = []
    labels = []
    seen = set()
    for a in lamp_group.elements():
        for b in lamp_group.elements():
            for e in (
                WreathElement.make(lamp_group, (1, 0), {(0, 0): a, (1, 0): b}),
                WreathElement.make(
                    lamp_group, (1, 0), {(0, 0): a, (1, 0): b}
                ).inverse(),
            ):
                key = (e.position, e.lamps)
                if key not in seen:
                    seen.add(key)
                    gens.append(e)
                    labels.append(f"m{'+' if e.position.x > 0 else '-'}{a}{b}")
    return GeneratingSet(gens, labels)


def is_complete(s: GeneratingSet) -> bool:
    """Closure under (z, f) -> (-z, f translated by -z)."""
    if s.group.order == 0:
        raise ConfigurationError("completeness is defined for finite lamp groups")
    elems = {(e.position, e.lamps) for e in s.elements}
    for e in s.elements:
        mirrored = e.lamps.translate((-e.position.x, -e.position.y))
        if (Point(-e.position.x, -e.position.y), mirrored) not in elems:
            return False
    return True


# ---------------------------------------------------------------------------
# S-paths


@dataclass(frozen=True)
class SPath:
    """Path in the right Cayley graph: start element plus generator moves."""

    start: WreathElement
    moves: tuple[tuple[int, bool], ...]  # (generator index, inverted)
    gens: GeneratingSet

    def __len__(self):
        return len(self.moves)

    def _step(self, idx: int, inverted: bool) -> WreathElement:
        g = self.gens.elements[idx]
        return g.inverse() if inverted else g

    def elements(self) -> list[WreathElement]:
        out = [self.start]
        for idx, inv in self.moves:
            if not 0 <= idx < len(self.gens):
                raise DomainError(f"generator index {idx} out of range")
            out.append(out[-1] * self._step(idx, inv))
        return out

    def end(self) -> WreathElement:
        cur = self.start
        for idx, inv in self.moves:
            if not 0 <= idx < len(self.gens):
                raise DomainError(f"generator index {idx} out of range")
            cur = cur * self._step(idx, inv)
        return cur

    def tau(self) -> LampConfig:
        """Net lamp-configuration change along the path."""
        return self.end().lamps.difference(self.start.lamps)

    def projected_start(self) -> Point:
        return self.start.position

    def projected_end(self) -> Point:
        return self.end().position

    def reversed(self) -> "SPath":
        if not self.gens.group.involutive:
            raise UnsupportedOperationError(
                "path reversal preserves lamp changes only for involutive lamps"
            )
        rev = tuple((idx, not inv) for idx, inv in reversed(self.moves))
        return SPath(self.end(), rev, self.gens)


def path_end(p: SPath) -> WreathElement:
    return p.end()


def path_tau(p: SPath) -> LampConfig:
    return p.tau()


def reverse_path(p: SPath) -> SPath:
    return p.reversed()


# ---------------------------------------------------------------------------
# word length via BFS on the Cayley graph


def _state_key(e: WreathElement):
    return (e.position.x, e.position.y, tuple(e.lamps.items()))


def _ball_states(
    gens: GeneratingSet, radius: int, state_budget: int, target=None
):
    """BFS layers of the Cayley ball; stops early when target is found."""
    group = gens.group
    moves = []
    for h, _, _ in gens.moves():
        moves.append(
            ((h.position.x, h.position.y), tuple((p, v) for p, v in h.lamps.items()))
        )
    start = (0, 0, ())
    dist = {start: 0}
    if target == start:
        return dist, 0
    frontier = [start]
    for depth in range(radius):
        nxt = []
        for (x, y, items) in frontier:
            base = dict(items)
            for (dz, lamp_items) in moves:
                nx, ny = x + dz[0], y + dz[1]
                if lamp_items:
                    cfg = dict(base)
                    for p, v in lamp_items:
                        site = Point(p.x + x, p.y + y)
                        nv = group.op(cfg.get(site, 0), v)
                        if nv == 0:
                            cfg.pop(site, None)
                        else:
                            cfg[site] = nv
                    key = (nx, ny, tuple(sorted(cfg.items())))
                else:
                    key = (nx, ny, items)
                if key not in dist:
                    dist[key] = depth + 1
                    if key == target:
                        return dist, depth + 1
                    nxt.append(key)
                    if len(dist) > state_budget:
                        raise ResourceLimitError(
                            f"BFS state budget {state_budget} exceeded at radius {depth + 1}"
                        )
        frontier = nxt
        if not frontier:
            break
    return dist, None


def ball(gens: GeneratingSet, radius: int, state_budget: int = 50_000_000):
    """Distances from the identity for the whole ball of the given radius."""
    dist, _ = _ball_states(gens, radius, state_budget)
    return dist


def key_to_element(key, group: LampGroup) -> WreathElement:
    x, y, items = key
    return WreathElement(Point(x, y), LampConfig(group, dict(items)))


def word_length_bfs(
    g: WreathElement,
    s: GeneratingSet,
    radius_cap: int,
    state_budget: int = 50_000_000,
) -> int | None:
    """Exact word length if it is <= radius_cap, else None (overflow)."""
    if radius_cap < 0:
        raise ConfigurationError("radius cap must be >= 0")
    _, found = _ball_states(s, radius_cap, state_budget, target=_state_key(g))
    return found


@dataclass(frozen=True)
class WordLengthBounds:
    lower: int
    upper: int
    ts_exact: bool

    def __iter__(self):
        return iter((self.lower, self.upper))


def word_length_bounds(g: WreathElement, exact_cap: int = 18) -> WordLengthBounds:
    """Travel-plus-switch sandwich for the standard generating set.

    lower = tsp(supp) + |supp|; upper adds |position| and twice the
    support diameter.  Valid for lamp group Z/2Z with the standard set.
    """
    from .tsp import exact_tsp, strip_heuristic

    if g.group.order != 2:
        raise ConfigurationError("bounds are stated for lamp group Z/2Z")
    supp = g.lamps.support()
    if not supp:
        base = 0
        ts_exact = True
    elif len(supp) <= exact_cap:
        base = exact_tsp([(p.x, p.y) for p in supp], cap=exact_cap).length
        ts_exact = True
    else:
        span = (
            max(
                max(p.x for p in supp) - min(p.x for p in supp),
                max(p.y for p in supp) - min(p.y for p in supp),
            )
            + 1
        )
        base = strip_heuristic([(p.x, p.y) for p in supp], span).length
        ts_exact = False
    lower = base + len(supp)
    diam = 0
    for i, p in enumerate(supp):
        for q in supp[i + 1 :]:
            diam = max(diam, abs(p.x - q.x) + abs(p.y - q.y))
    upper = lower + abs(g.position.x) + abs(g.position.y) + 2 * diam
    return WordLengthBounds(lower, upper, ts_exact)


def oned_closed_form(g: WreathElement) -> int:
    """Textbook closed form for the line with move-and-switch generators.

    Known to disagree with the BFS metric on simple inputs; evaluated for
    reporting only, never trusted.
    """
    supp = g.lamps.support()
    if not supp:
        raise DomainError("closed form needs a non-empty lamp support")
    mx = max(p.x for p in supp)
    mn = min(p.x for p in supp)
    return 2 * mx - 2 * mn - abs(g.position.x)


def oned_word_length(
    g: WreathElement, s: GeneratingSet, state_budget: int = 50_000_000
) -> int:
    """BFS word length on Z wr F with a move-and-switch set.

    Precondition: non-empty support and the walker position inside the
    support's interval.  The closed form is evaluated alongside and any
    discrepancy is logged, not returned.
    """
    supp = g.lamps.support()
    if not supp:
        raise DomainError("empty lamp support is outside this operation's domain")
    xs = [p.x for p in supp]
    if not (min(xs) <= g.position.x <= max(xs)):
        raise DomainError("walker position must lie inside the support interval")
    if any(p.y != 0 for p in supp) or g.position.y != 0:
        raise DomainError("one-dimensional base required")
    cap = 4 * (max(xs) - min(xs) + abs(g.position.x) + len(supp)) + 8
    val = word_length_bfs(g, s, cap, state_budget)
    if val is None:
        raise ResourceLimitError(f"word length exceeds search cap {cap}")
    cf = oned_closed_form(g)
    if cf != val:
        log.info(
            "closed-form line length %d disagrees with BFS %d for %r", cf, val, g
        )
    return val


# ---------------------------------------------------------------------------
# wreath step distributions


class WreathStepDistribution:
    """Finite-atom step law on the wreath product."""

    def __init__(self, atoms: Iterable[tuple[WreathElement, float]]):
        self.atoms = [(e, float(p)) for e, p in atoms]
        if not self.atoms:
            raise ConfigurationError("need at least one atom")
        total = sum(p for _, p in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ConfigurationError(f"atom probabilities sum to {total}, not 1")
        if any(p <= 0 for _, p in self.atoms):
            raise ConfigurationError("atom probabilities must be positive")
        g0 = self.atoms[0][0].group
        if any(e.group is not g0 for e, _ in self.atoms):
            raise ConfigurationError("atoms over mixed lamp groups")
        self.group = g0

    def prob_of(self, e: WreathElement) -> float:
        key = (e.position, e.lamps)
        return sum(p for a, p in self.atoms if (a.position, a.lamps) == key)

    def delta_element(self) -> WreathElement:
        return WreathElement.make(self.group, (0, 0), {(0, 0): 1})

    def uniform_split(self) -> tuple[float, "WreathStepDistribution | None"]:
        """mu = a*u + (1-a)*mu' with u uniform on {id, delta}, a = min of the two masses."""
        ident = WreathElement.identity(self.group)
        delta = self.delta_element()
        a = min(self.prob_of(ident), self.prob_of(delta))
        if a <= 0:
            return 0.0, self
        merged: dict = {}
        for e, p in self.atoms:
            key = (e.position, e.lamps)
            prev = merged.get(key, (e, 0.0))
            merged[key] = (prev[0], prev[1] + p)
        for special in (ident, delta):
            k = (special.position, special.lamps)
            e, p = merged[k]
            merged[k] = (e, p - a / 2.0)
        residual = [(e, p / (1.0 - a)) for (e, p) in merged.values() if p > 1e-15]
        return a, WreathStepDistribution(residual)

    @classmethod
    def from_split(
        cls, a: float, mu_prime: "WreathStepDistribution"
    ) -> "WreathStepDistribution":
        if not 0 < a <= 1:
            raise ConfigurationError("split weight must lie in (0, 1]")
        ident = WreathElement.identity(mu_prime.group)
        delta = mu_prime.delta_element()
        merged: dict = {}
        for e, p in [(ident, a / 2), (delta, a / 2)] + [
            (e, (1 - a) * p) for e, p in mu_prime.atoms
        ]:
            key = (e.position, e.lamps)
            if key in merged:
                merged[key] = (merged[key][0], merged[key][1] + p)
            else:
                merged[key] = (e, p)
        return cls(list(merged.values()))

    def nondegenerate(self) -> bool:
        """Pragmatic check: base projection non-degenerate and lamps reachable."""
        from .lattice import StepDistribution

        proj: dict = {}
        for e, p in self.atoms:
            key = (e.position.x, e.position.y)
            proj[key] = proj.get(key, 0.0) + p
        base = StepDistribution([(k, v) for k, v in proj.items()])
        touches_lamps = any(e.lamps for e, _ in self.atoms)
        return base.nondegenerate() and touches_lamps


def sws_measure(
    eta: Sequence[tuple[int, float]],
    nu_atoms: Sequence[tuple[tuple[int, int], float]],
    lamp_group: LampGroup,
) -> WreathStepDistribution:
    """Switch-walk-switch convolution: toggle, move, toggle.

    ``eta`` lists (lamp value, probability) applied at the walker's
    position before and after a ``nu`` move.
    """
    pe = sum(p for _, p in eta)
    pn = sum(p for _, p in nu_atoms)
    if abs(pe - 1) > 1e-12 or abs(pn - 1) > 1e-12:
        raise ConfigurationError("eta and nu must each sum to 1")
    if not any(v != 0 and p > 0 for v, p in eta):
        raise ConfigurationError(
            "switch law never touches a lamp; walk is degenerate on the wreath product"
        )
    merged: dict = {}
    for v1, p1 in eta:
        for dz, pz in nu_atoms:
            for v2, p2 in eta:
                e = (
                    WreathElement.make(lamp_group, (0, 0), {(0, 0): v1})
                    * WreathElement.make(lamp_group, dz)
                    * WreathElement.make(lamp_group, (0, 0), {(0, 0): v2})
                )
                key = (e.position, e.lamps)
                p = p1 * pz * p2
                if key in merged:
                    merged[key] = (e, merged[key][1] + p)
                else:
                    merged[key] = (e, p)
    return WreathStepDistribution(list(merged.values()))


def standard_sws_z2() -> WreathStepDistribution:
    """Fair toggle at the walker, simple random walk move, fair toggle."""
    return sws_measure(
        [(0, 0.5), (1, 0.5)],
        [((1, 0), 0.25), ((-1, 0), 0.25), ((0, 1), 0.25), ((0, -1), 0.25)],
        Z2_LAMPS,
    )


def standard_sws_line(lamp_group: LampGroup | None = None) -> WreathStepDistribution:
    """Toggle-move-toggle on the line with fair +-1 moves."""
    lamp_group = lamp_group or Z2_LAMPS
    if lamp_group.order == 2:
        eta = [(0, 0.5), (1, 0.5)]
    elif lamp_group.order == 0:
        eta = [(1, 0.5), (-1, 0.5)]
    else:
        eta = [(0, 0.5), (1, 0.5)]
    return sws_measure(eta, [((1, 0), 0.5), ((-1, 0), 0.5)], lamp_group)
