"""Exact and heuristic tour solvers."""

import math

import numpy as np
import pytest

from lamptsp.errors import DomainError, ResourceLimitError
from lamptsp.lattice import PointSet, dilute, sample_walk, srw2d
from lamptsp.rng import derive_key, stream
from lamptsp.tsp import (
    GridPath,
    box_tsp_diluted,
    connected_set_tour,
    exact_tsp,
    hilbert_index,
    load_point_set,
    s_path_tsp_exact,
    save_point_set,
    strip_heuristic,
)
from lamptsp.wreath import LampConfig, WreathElement, Z2_LAMPS, standard_lamplighter_gens


def random_points(gen, n, side):
    pts = set()
    while len(pts) < n:
        pts.add((int(gen.integers(side)), int(gen.integers(side))))
    return sorted(pts)


def random_connected(gen, n):
    pts = {(0, 0)}
    while len(pts) < n:
        x, y = list(sorted(pts))[int(gen.integers(len(pts)))]
        dx, dy = [(1, 0), (-1, 0), (0, 1), (0, -1)][int(gen.integers(4))]
        pts.add((x + dx, y + dy))
    return sorted(pts)


# ---------------------------------------------------------------------------
# exact solver


def test_exact_singleton():
    r = exact_tsp([(0, 0)])
    assert r.length == 0 and r.exact


def test_exact_pair_is_l1():
    r = exact_tsp([(0, 0), (3, 4)])
    assert r.length == 7
    assert r.path.length == 7


def test_exact_full_square():
    sq = [(i, j) for i in range(3) for j in range(3)]
    r = exact_tsp(sq)
    assert r.length == 8
    assert r.visits_all(PointSet(sq))


def test_exact_cap():
    pts = [(i, 0) for i in range(19)]
    with pytest.raises(ResourceLimitError):
        exact_tsp(pts, cap=18)


def test_exact_empty_rejected():
    with pytest.raises(DomainError):
        exact_tsp([])


def test_exact_translation_and_order_invariance():
    gen = stream(1)
    for trial in range(10):
        pts = random_points(gen, 7, 12)
        base = exact_tsp(pts).length
        shifted = exact_tsp([(x + 13, y - 40) for x, y in pts]).length
        shuffled = list(pts)
        gen.shuffle(shuffled)
        assert exact_tsp(shuffled).length == base
        assert shifted == base


def test_exact_lower_bound_pairwise():
    gen = stream(2)
    for trial in range(10):
        pts = random_points(gen, 8, 15)
        r = exact_tsp(pts)
        arr = np.asarray(pts)
        pair_max = int(
            np.abs(arr[:, None, :] - arr[None, :, :]).sum(axis=2).max()
        )
        assert r.length >= pair_max


def test_exact_brute_force_cross_check():
    # independent oracle: full permutation scan on tiny instances
    from itertools import permutations

    gen = stream(3)
    for trial in range(8):
        pts = random_points(gen, 6, 9)
        arr = np.asarray(pts)
        best = min(
            sum(
                int(np.abs(arr[a] - arr[b]).sum())
                for a, b in zip(perm, perm[1:])
            )
            for perm in permutations(range(len(pts)))
        )
        assert exact_tsp(pts).length == best


# ---------------------------------------------------------------------------
# strip heuristic


def test_strip_single_point():
    r = strip_heuristic([(2, 2)], 5)
    assert r.length == 0 and not r.exact


def test_strip_full_square_bound():
    m = 9
    sq = [(i, j) for i in range(m) for j in range(m)]
    r = strip_heuristic(sq, m)
    n = len(sq)
    assert r.length <= 2 * m * math.ceil(math.sqrt(n)) + 2 * m
    assert r.length >= n - 1
    assert r.visits_all(PointSet(sq))


def test_strip_bound_and_dominates_exact():
    gen = stream(4)
    for trial in range(60):
        m = int(gen.integers(6, 21))
        n = int(gen.integers(2, 13))
        pts = random_points(gen, n, m)
        r = strip_heuristic(pts, m)
        assert r.length <= 2 * m * math.ceil(math.sqrt(n)) + 2 * m
        assert r.visits_all(PointSet(pts))
        assert r.length >= exact_tsp(pts).length


def test_strip_rejects_outside_square():
    with pytest.raises(DomainError):
        strip_heuristic([(0, 0), (7, 0)], 5)


# ---------------------------------------------------------------------------
# connected-set tour


def test_connected_tour_full_square():
    sq = PointSet([(i, j) for i in range(3) for j in range(3)])
    r = connected_set_tour(sq)
    ratio = len(sq.boundary()) / len(sq)
    assert r.length <= 9 * (1 + 16 * ratio ** (1 / 3))
    assert r.length >= 8
    assert r.visits_all(sq)


def test_connected_tour_segment():
    k = 12
    seg = PointSet([(i, 0) for i in range(k)])
    r = connected_set_tour(seg)
    assert r.length == k - 1


def test_connected_tour_rejects_disconnected():
    with pytest.raises(DomainError):
        connected_set_tour(PointSet([(0, 0), (5, 5)]))


def test_connected_tour_random_blobs():
    gen = stream(5)
    for trial in range(15):
        pts = PointSet(random_connected(gen, int(gen.integers(10, 60))))
        r = connected_set_tour(pts)
        ratio = len(pts.boundary()) / len(pts)
        assert r.visits_all(pts)
        assert r.length <= len(pts) * (1 + 16 * ratio ** (1 / 3))


def test_connected_lemma_constant_on_exact_values():
    # the 1 + 8 (|bd|/|V|)^{1/3} bound checked against exact tours
    gen = stream(6)
    for trial in range(30):
        pts = PointSet(random_connected(gen, int(gen.integers(4, 15))))
        ratio = len(pts.boundary()) / len(pts)
        bound = len(pts) * (1 + 8 * ratio ** (1 / 3))
        assert exact_tsp(pts).length <= bound


# ---------------------------------------------------------------------------
# box decomposition


def test_box_single_full_box():
    sq = PointSet([(i, j) for i in range(4) for j in range(4)])
    r = box_tsp_diluted(sq, sq, 4)
    assert r.visits_all(sq)
    assert r.length <= exact_tsp([(i, j) for i in range(4) for j in range(4)], cap=16).length + 16


def test_box_empty_diluted():
    rng_set = PointSet([(0, 0), (1, 0)])
    r = box_tsp_diluted(PointSet(), rng_set, 4)
    assert r.length == 0
    assert r.order.shape[0] == 1


def test_box_requires_subset():
    with pytest.raises(DomainError):
        box_tsp_diluted(PointSet([(9, 9)]), PointSet([(0, 0)]), 4)


def test_box_decomposition_budget():
    # reported length within the decomposition allowance, walk ranges
    for trial in range(3):
        rng_set = sample_walk(srw2d(), 2**12, derive_key(60, trial)).range()
        diluted = dilute(rng_set, 0.5, derive_key(61, trial))
        r = box_tsp_diluted(diluted, rng_set, 8)
        assert r.visits_all(diluted)
        assert r.length <= r.stats.decomposition_budget()


def test_box_heuristic_not_below_exact():
    gen = stream(7)
    for trial in range(10):
        pts = PointSet(random_points(gen, 10, 12))
        r = box_tsp_diluted(pts, pts, 6)
        assert r.length >= exact_tsp(pts).length
        assert r.visits_all(pts)


def test_hilbert_index_locality():
    xs, ys = np.meshgrid(np.arange(16), np.arange(16))
    idx = hilbert_index(xs.ravel(), ys.ravel())
    assert sorted(idx.tolist()) == list(range(256))
    order = np.argsort(idx)
    px, py = xs.ravel()[order], ys.ravel()[order]
    steps = np.abs(np.diff(px)) + np.abs(np.diff(py))
    assert np.all(steps == 1)  # the curve moves one cell at a time


# ---------------------------------------------------------------------------
# generator-path search


def test_s_path_empty_target():
    cfg = LampConfig(Z2_LAMPS)
    assert s_path_tsp_exact(cfg, standard_lamplighter_gens()) == 0


def test_s_path_single_lamp():
    cfg = LampConfig(Z2_LAMPS, {(0, 0): 1})
    assert s_path_tsp_exact(cfg, standard_lamplighter_gens()) == 1


def test_s_path_matches_tour_plus_switches():
    # oracle: breadth-first scan of all generator paths
    gens = standard_lamplighter_gens()
    gen = stream(8)
    for trial in range(8):
        sites = set()
        for _ in range(int(gen.integers(1, 5))):
            sites.add((int(gen.integers(2)), int(gen.integers(2))))
        cfg = LampConfig(Z2_LAMPS, {s: 1 for s in sites})
        val = s_path_tsp_exact(cfg, gens)
        expected = exact_tsp(sorted(sites)).length + len(sites)
        assert val == expected


def test_s_path_cap():
    cfg = LampConfig(Z2_LAMPS, {(i, j): 1 for i in range(5) for j in range(5)})
    with pytest.raises(ResourceLimitError):
        s_path_tsp_exact(cfg, standard_lamplighter_gens(), cap=1000)


# ---------------------------------------------------------------------------
# CSV round trip


def test_point_set_csv_roundtrip(tmp_path):
    ps = PointSet([(0, 0), (-3, 7), (12, -5)])
    path = tmp_path / "pts.csv"
    save_point_set(ps, path)
    assert load_point_set(path) == ps
