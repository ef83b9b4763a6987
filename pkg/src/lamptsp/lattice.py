"""Random walks on Z and Z^2: sampling, ranges, boundaries, local times.

Points are pairs of 64-bit integers; the 1-D base embeds as y = 0.
Adjacency is 4-adjacency throughout (generators (1,0) and (0,1)).
Everything here is a pure function of its inputs plus a 64-bit seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ConfigurationError
from .rng import derive_key, point_uniforms, stream

_OFF = 1 << 31
_E1 = np.uint64(1) << np.uint64(32)
_E2 = np.uint64(1)


class Point(NamedTuple):
    x: int
    y: int


def encode(xs, ys) -> np.ndarray:
    """Pack coordinate arrays into sortable uint64 keys."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    return ((xs + _OFF).astype(np.uint64) << np.uint64(32)) | (ys + _OFF).astype(
        np.uint64
    )


def decode(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keys = np.asarray(keys, dtype=np.uint64)
    xs = (keys >> np.uint64(32)).astype(np.int64) - _OFF
    ys = (keys & np.uint64(0xFFFFFFFF)).astype(np.int64) - _OFF
    return xs, ys


class PointSet:
    """Finite subset of the lattice with a cached inner boundary.

    Canonical representation is a sorted array of packed keys, so equality
    and hashing are cheap and independent of construction order.
    """

    __slots__ = ("keys", "_boundary")

    def __init__(self, points: Iterable[tuple[int, int]] = ()):
        pts = list(points)
        if pts:
            xs = np.fromiter((p[0] for p in pts), dtype=np.int64, count=len(pts))
            ys = np.fromiter((p[1] for p in pts), dtype=np.int64, count=len(pts))
            self.keys = np.unique(encode(xs, ys))
        else:
            self.keys = np.empty(0, dtype=np.uint64)
        self._boundary: PointSet | None = None

    @classmethod
    def from_keys(cls, keys: np.ndarray) -> "PointSet":
        ps = cls.__new__(cls)
        ps.keys = np.unique(np.asarray(keys, dtype=np.uint64))
        ps._boundary = None
        return ps

    @classmethod
    def from_arrays(cls, xs, ys) -> "PointSet":
        return cls.from_keys(encode(xs, ys))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return decode(self.keys)

    def points(self) -> list[Point]:
        xs, ys = self.arrays()
        return [Point(int(x), int(y)) for x, y in zip(xs, ys)]

    def __len__(self) -> int:
        return int(self.keys.size)

    def __iter__(self):
        return iter(self.points())

    def __contains__(self, p) -> bool:
        k = encode([p[0]], [p[1]])
        i = np.searchsorted(self.keys, k[0])
        return bool(i < self.keys.size and self.keys[i] == k[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSet) and np.array_equal(self.keys, other.keys)

    def __hash__(self) -> int:
        return hash(self.keys.tobytes())

    def __repr__(self) -> str:
        return f"PointSet(n={len(self)})"

    def boundary(self) -> "PointSet":
        """Inner boundary: members with at least one 4-neighbor outside."""
        if self._boundary is None:
            if not len(self):
                self._boundary = PointSet()
            else:
                k = self.keys
                inside = np.ones(k.size, dtype=bool)
                for shift in (_E1, _E2):
                    inside &= np.isin(k + shift, k, assume_unique=True)
                    inside &= np.isin(k - shift, k, assume_unique=True)
                self._boundary = PointSet.from_keys(k[~inside])
        return self._boundary

    def folner_ratio(self) -> float:
        """|boundary| / |set|; 0 for the empty set."""
        return len(self.boundary()) / len(self) if len(self) else 0.0


class StepDistribution:
    """Finite-atom step law on the base lattice.

    ``moment_tag`` is metadata ("finite-support", "second-moment" or
    "2+eps-moment") consumed by experiment schedules; the atoms themselves
    are always an explicit finite list.
    """

    def __init__(
        self,
        atoms: Iterable[tuple[tuple[int, int], float]],
        moment_tag: str = "finite-support",
        centered: bool | None = None,
    ):
        atoms = list(atoms)
        if not atoms:
            raise ConfigurationError("step distribution needs at least one atom")
        self.displacements = np.array([a[0] for a in atoms], dtype=np.int64)
        self.probs = np.array([a[1] for a in atoms], dtype=np.float64)
        if self.displacements.ndim != 2 or self.displacements.shape[1] != 2:
            raise ConfigurationError("displacements must be lattice vectors (dx, dy)")
        if np.any(self.probs <= 0):
            raise ConfigurationError("atom probabilities must be positive")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ConfigurationError(
                f"atom probabilities sum to {self.probs.sum()!r}, not 1"
            )
        if moment_tag not in ("finite-support", "second-moment", "2+eps-moment"):
            raise ConfigurationError(f"unknown moment tag {moment_tag!r}")
        self.moment_tag = moment_tag
        self._cum = np.cumsum(self.probs)
        self._cum[-1] = 1.0

        mean = self.probs @ self.displacements
        self.centered = bool(np.all(np.abs(mean) < 1e-9))
        if centered is True and not self.centered:
            raise ConfigurationError(f"declared centered but mean step is {mean}")

    def atoms(self) -> list[tuple[Point, float]]:
        return [
            (Point(int(d[0]), int(d[1])), float(p))
            for d, p in zip(self.displacements, self.probs)
        ]

    @property
    def one_dimensional(self) -> bool:
        return bool(np.all(self.displacements[:, 1] == 0))

    def nondegenerate(self) -> bool:
        """True iff the support generates the base lattice as a semigroup.

        Checked by closing the atom set under addition inside a bounded
        window until the four (resp. two) unit steps are reached.
        """
        targets = {(1, 0), (-1, 0)}
        if not self.one_dimensional:
            targets |= {(0, 1), (0, -1)}
        radius = 3 * int(np.abs(self.displacements).sum(axis=1).max()) + 3
        atoms = {(int(d[0]), int(d[1])) for d in self.displacements}
        seen = set(atoms)
        frontier = set(atoms)
        while frontier and not targets <= seen:
            nxt = set()
            for (ax, ay) in frontier:
                for (bx, by) in atoms:
                    c = (ax + bx, ay + by)
                    if abs(c[0]) + abs(c[1]) <= radius and c not in seen:
                        seen.add(c)
                        nxt.add(c)
            frontier = nxt
        return targets <= seen

    def tail_second_moment(self, r: float) -> float:
        """Sum of |g|^2 mu(g) over atoms with |g| >= r (L1 norm)."""
        norms = np.abs(self.displacements).sum(axis=1)
        sel = norms >= r
        return float((norms[sel] ** 2 * self.probs[sel]).sum())


def srw2d() -> StepDistribution:
    """Simple random walk on Z^2."""
    return StepDistribution(
        [((1, 0), 0.25), ((-1, 0), 0.25), ((0, 1), 0.25), ((0, -1), 0.25)]
    )


def srw1d() -> StepDistribution:
    """Simple random walk on Z (embedded at y = 0)."""
    return StepDistribution([((1, 0), 0.5), ((-1, 0), 0.5)])


def power_tail_2d(exponent: float, cutoff: int) -> StepDistribution:
    """Axis-aligned symmetric steps on Z^2 with a truncated power tail."""
    if cutoff < 1 or exponent <= 1:
        raise ConfigurationError("need cutoff >= 1 and exponent > 1")
    ks = np.arange(1, cutoff + 1, dtype=np.float64)
    w = ks ** (-(1.0 + exponent))
    w /= 4 * w.sum()
    atoms = []
    for k, p in zip(ks, w):
        atoms += [
            ((int(k), 0), float(p)),
            ((-int(k), 0), float(p)),
            ((0, int(k)), float(p)),
            ((0, -int(k)), float(p)),
        ]
    tag = "2+eps-moment" if exponent > 2 else "second-moment"
    return StepDistribution(atoms, moment_tag=tag)


def power_tail_1d(exponent: float, cutoff: int) -> StepDistribution:
    """Symmetric integer law with P(step = +-k) ~ k^-(1+exponent), truncated.

    ``exponent`` > 2 gives a finite second moment; the tag records which
    side of 2+eps the exponent falls on.
    """
    if cutoff < 1 or exponent <= 1:
        raise ConfigurationError("need cutoff >= 1 and exponent > 1")
    ks = np.arange(1, cutoff + 1, dtype=np.float64)
    w = ks ** (-(1.0 + exponent))
    w /= 2 * w.sum()
    atoms = [((int(k), 0), float(p)) for k, p in zip(ks, w)]
    atoms += [((-int(k), 0), float(p)) for k, p in zip(ks, w)]
    tag = "2+eps-moment" if exponent > 2 else "second-moment"
    return StepDistribution(atoms, moment_tag=tag)


@dataclass(frozen=True)
class Trajectory:
    """A sampled walk: start, per-step displacements, derived positions."""

    start: Point
    steps: np.ndarray  # (n, 2) int64
    seed: int

    @property
    def n(self) -> int:
        return int(self.steps.shape[0])

    @property
    def positions(self) -> np.ndarray:
        """(n+1, 2) array of visited positions, positions[0] = start."""
        out = np.empty((self.n + 1, 2), dtype=np.int64)
        out[0] = (self.start.x, self.start.y)
        if self.n:
            np.cumsum(self.steps, axis=0, out=out[1:])
            out[1:] += out[0]
        return out

    def range(self) -> PointSet:
        pos = self.positions
        return PointSet.from_arrays(pos[:, 0], pos[:, 1])

    def max_displacement(self) -> int:
        """max_t |position_t - start| in L1."""
        pos = self.positions
        return int(np.abs(pos - pos[0]).sum(axis=1).max())


def sample_walk(dist: StepDistribution, n: int, seed: int) -> Trajectory:
    """Sample n steps of the walk; deterministic in (dist, n, seed)."""
    if n < 0:
        raise ConfigurationError("step count must be >= 0")
    gen = stream(derive_key(seed))
    u = gen.random(n)
    idx = np.searchsorted(dist._cum, u, side="right")
    return Trajectory(Point(0, 0), dist.displacements[idx], seed)


def inner_boundary(v: PointSet) -> PointSet:
    return v.boundary()


@dataclass
class VisitCounts:
    """Local times: visit multiplicity per site of a trajectory's range."""

    site_keys: np.ndarray
    counts: np.ndarray
    total: int = field(init=False)

    def __post_init__(self):
        self.total = int(self.counts.sum())

    def as_dict(self) -> dict[Point, int]:
        xs, ys = decode(self.site_keys)
        return {
            Point(int(x), int(y)): int(c) for x, y, c in zip(xs, ys, self.counts)
        }

    def range(self) -> PointSet:
        return PointSet.from_keys(self.site_keys)


def visit_counts(t: Trajectory) -> VisitCounts:
    pos = t.positions
    keys = encode(pos[:, 0], pos[:, 1])
    sites, counts = np.unique(keys, return_counts=True)
    return VisitCounts(sites, counts)


def thin_points(c: VisitCounts, q: int) -> int:
    """Number of sites visited at least once and at most q times."""
    if q < 1:
        raise ConfigurationError("q must be >= 1")
    return int(np.count_nonzero(c.counts <= q))


def local_time_power_sum(c: VisitCounts, alpha: float) -> float:
    """Sum over visited sites of (visit count)^alpha."""
    if alpha <= 0:
        raise ConfigurationError("alpha must be positive")
    if alpha == 1.0:
        return float(c.total)
    return float(np.power(c.counts.astype(np.float64), alpha).sum())


def dilute(v: PointSet, p: float, seed: int) -> PointSet:
    """Independent p-thinning, keyed per point by (seed, x, y).

    The keyed draws give a monotone coupling: with the same seed,
    dilute(v, p) is a subset of dilute(v, p') whenever p <= p'.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError("keep probability must lie in [0, 1]")
    if not len(v):
        return PointSet()
    xs, ys = v.arrays()
    u = point_uniforms(seed, xs, ys)
    return PointSet.from_keys(v.keys[u < p])
