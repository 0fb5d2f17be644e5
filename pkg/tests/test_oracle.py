import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppcm.degrees import DegreeDistribution
from fppcm.graph import MultiGraph, build, pairs_to_partner, sample_degree_sequence
from fppcm.oracle import WeightedGraph, assign_weights, brute_force_path, shortest_path


def _graph(degrees, pairs, weights):
    first = np.array([p[0] for p in pairs])
    second = np.array([p[1] for p in pairs])
    partner, eid = pairs_to_partner(first, second, int(sum(degrees)))
    return WeightedGraph(MultiGraph(degrees, partner, eid), np.array(weights, dtype=float))


def test_same_vertex():
    wg = _graph([2, 2], [(0, 2), (1, 3)], [0.3, 0.7])
    assert shortest_path(wg, 0, 0) == (0.0, 0)


def test_parallel_edges():
    wg = _graph([2, 2], [(0, 2), (1, 3)], [0.3, 0.7])
    assert shortest_path(wg, 0, 1) == (pytest.approx(0.3), 1)


def test_two_hops_beat_direct_edge():
    # vertices 0,1,2 each of degree 2: edges 0-1 (0.2), 1-2 (0.2), 0-2 (0.5)
    wg = _graph([2, 2, 2], [(0, 2), (3, 4), (1, 5)], [0.2, 0.2, 0.5])
    w, h = shortest_path(wg, 0, 2)
    assert w == pytest.approx(0.4) and h == 2


def test_unreachable():
    wg = _graph([2, 2], [(0, 1), (2, 3)], [1.0, 1.0])
    assert shortest_path(wg, 0, 1) is None


def test_empty_edge_graph():
    g = MultiGraph(np.zeros(3, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    assert assign_weights(g, np.random.default_rng(0)).weights.size == 0


def test_weights_are_exponential():
    rng = np.random.default_rng(1)
    g = build(np.full(10**6, 2), rng)
    w = assign_weights(g, rng).weights
    assert w.size == 10**6
    assert w.min() > 0
    assert abs(w.mean() - 1) <= 3 / 1000
    p = math.exp(-1)
    assert abs((w > 1).mean() - p) <= 3 * math.sqrt(p * (1 - p) / 1e6)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**7), n=st.integers(2, 9))
def test_dijkstra_matches_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    seq = sample_degree_sequence(n, DegreeDistribution.explicit({2: 0.6, 3: 0.4}), rng)
    wg = assign_weights(build(seq, rng), rng)
    u, v = (int(x) for x in rng.choice(n, 2, replace=False))
    fast, slow = shortest_path(wg, u, v), brute_force_path(wg, u, v)
    if slow is None:
        assert fast is None
    else:
        assert fast[0] == pytest.approx(slow[0], rel=1e-12)
        assert fast[1] == slow[1]
