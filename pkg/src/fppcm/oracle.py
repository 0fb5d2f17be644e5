"""Ground truth for weighted distances: Exp(1) edge weights and Dijkstra."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .graph import MultiGraph


@dataclass(frozen=True)
class WeightedGraph:
    base: MultiGraph
    weights: np.ndarray  # indexed by edge id

    def stub_weight(self, stub: int) -> float:
        return float(self.weights[self.base.edge_of[stub]])


def assign_weights(g: MultiGraph, rng: np.random.Generator) -> WeightedGraph:
    """Independent Exp(1) weight per edge id, drawn as ``-log(U)`` with ``U`` in ``(0, 1]``."""
    w = -np.log1p(-rng.random(g.n_edges))
    return WeightedGraph(g, w)


def shortest_path(wg: WeightedGraph, src: int, dst: int) -> tuple[float, int] | None:
    """``(weight, hops)`` of the minimal-weight path, or None if unreachable.

    Labels are compared as ``(weight, hops, vertex)`` so equal-weight ties
    resolve deterministically towards fewer hops.
    """
    g = wg.base
    if src == dst:
        return 0.0, 0
    offsets = g.offsets.tolist()
    nbr = g.owner[g.partner].tolist()
    w_stub = wg.weights[g.edge_of].tolist()
    best = {src: (0.0, 0)}
    done = set()
    heap = [(0.0, 0, src)]
    while heap:
        d, h, v = heapq.heappop(heap)
        if v in done:
            continue
        if v == dst:
            return d, h
        done.add(v)
        for s in range(offsets[v], offsets[v + 1]):
            x = nbr[s]
            if x == v or x in done:
                continue
            cand = (d + w_stub[s], h + 1)
            old = best.get(x)
            if old is None or cand < old:
                best[x] = cand
                heapq.heappush(heap, (cand[0], cand[1], x))
    return None


def brute_force_path(wg: WeightedGraph, src: int, dst: int) -> tuple[float, int] | None:
    """Minimum over all simple paths by exhaustive depth-first enumeration (tiny graphs only)."""
    g = wg.base
    if src == dst:
        return 0.0, 0
    best = [math.inf, 0]

    def walk(v, seen, weight, hops):
        for s in range(g.offsets[v], g.offsets[v + 1]):
            x = int(g.owner[g.partner[s]])
            if x in seen:
                continue
            nw = weight + wg.stub_weight(s)
            if x == dst:
                if (nw, hops + 1) < tuple(best):
                    best[0], best[1] = nw, hops + 1
            else:
                walk(x, seen | {x}, nw, hops + 1)

    walk(src, {src}, 0.0, 0)
    return None if best[0] == math.inf else (best[0], best[1])
