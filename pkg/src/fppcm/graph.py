"""Configuration-model multigraphs built by uniform stub matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degrees import DegreeDistribution
from .errors import NotConnected, OddStubTotal


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray
    parity_fixed: bool = False

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def total(self) -> int:
        """``L_n``, the number of stubs."""
        return int(self.degrees.sum())


def sample_degree_sequence(n: int, dist: DegreeDistribution, rng: np.random.Generator) -> DegreeSequence:
    """``n`` i.i.d. degrees; an odd total is fixed by adding one stub to the last vertex."""
    if n < 2:
        raise ValueError("need n >= 2")
    d = np.asarray(dist.sample(rng, n), dtype=np.int64)
    fixed = bool(d.sum() & 1)
    if fixed:
        d[-1] += 1
    return DegreeSequence(d, fixed)


def stub_layout(degrees: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(offsets, owner)``: stubs of vertex ``v`` are ``offsets[v]:offsets[v+1]``."""
    degrees = np.asarray(degrees, dtype=np.int64)
    offsets = np.zeros(len(degrees) + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    owner = np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)
    return offsets, owner


class MultiGraph:
    """Stub-level multigraph.

    ``partner[s]`` is the stub matched to stub ``s`` and ``edge_of[s]`` its edge
    id.  Self-loops and parallel edges are kept.
    """

    def __init__(self, degrees, partner, edge_of=None):
        self.degrees = np.asarray(degrees, dtype=np.int64)
        self.offsets, self.owner = stub_layout(self.degrees)
        self.partner = np.asarray(partner, dtype=np.int64)
        if len(self.partner) != len(self.owner):
            raise ValueError("partner array does not match the stub count")
        if edge_of is None:
            edge_of = np.empty(len(self.partner), dtype=np.int64)
            lo = np.flatnonzero(np.arange(len(self.partner)) < self.partner)
            edge_of[lo] = np.arange(len(lo))
            edge_of[self.partner[lo]] = edge_of[lo]
        self.edge_of = np.asarray(edge_of, dtype=np.int64)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def n_stubs(self) -> int:
        return len(self.partner)

    @property
    def n_edges(self) -> int:
        return len(self.partner) // 2

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(u, v, edge_id)`` arrays sorted by edge id."""
        s = np.arange(self.n_stubs)
        first = s < self.partner
        a = s[first]
        order = np.argsort(self.edge_of[a], kind="stable")
        a = a[order]
        return self.owner[a], self.owner[self.partner[a]], self.edge_of[a]

    def neighbors(self, v: int) -> np.ndarray:
        lo, hi = self.offsets[v], self.offsets[v + 1]
        return self.owner[self.partner[lo:hi]]

    def recomputed_degrees(self) -> np.ndarray:
        """Degrees read off the matching: self-loops count twice."""
        u, v, _ = self.edges()
        return np.bincount(np.concatenate([u, v]), minlength=self.n)

    def write_edge_list(self, fh) -> None:
        u, v, e = self.edges()
        for a, b, k in zip(u.tolist(), v.tolist(), e.tolist()):
            fh.write(f"{a} {b} {k}\n")

    def stubs_of(self, vertices: np.ndarray) -> np.ndarray:
        """All stubs of ``vertices`` concatenated."""
        starts = self.offsets[vertices]
        counts = self.degrees[vertices]
        total = int(counts.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        shift = np.repeat(starts - np.cumsum(counts) + counts, counts)
        return shift + np.arange(total, dtype=np.int64)


def pairs_to_partner(first: np.ndarray, second: np.ndarray, n_stubs: int) -> tuple[np.ndarray, np.ndarray]:
    """Partner and edge-id arrays from the k-th pair ``(first[k], second[k])``."""
    partner = np.empty(n_stubs, dtype=np.int64)
    edge_of = np.empty(n_stubs, dtype=np.int64)
    partner[first] = second
    partner[second] = first
    ids = np.arange(len(first), dtype=np.int64)
    edge_of[first] = ids
    edge_of[second] = ids
    return partner, edge_of


def build(seq: DegreeSequence | np.ndarray, rng: np.random.Generator) -> MultiGraph:
    """Uniform perfect matching: shuffle the stubs, pair positions ``2k, 2k+1``."""
    degrees = seq.degrees if isinstance(seq, DegreeSequence) else np.asarray(seq, dtype=np.int64)
    total = int(degrees.sum())
    if total & 1:
        raise OddStubTotal(f"stub total {total} is odd")
    perm = rng.permutation(total)
    partner, edge_of = pairs_to_partner(perm[0::2], perm[1::2], total)
    return MultiGraph(degrees, partner, edge_of)


def bfs_distance(g: MultiGraph, u: int, v: int) -> int:
    """Hop distance by a bidirectional frontier search; raises NotConnected."""
    if u == v:
        return 0
    dist = [np.full(g.n, -1, dtype=np.int64), np.full(g.n, -1, dtype=np.int64)]
    dist[0][u] = 0
    dist[1][v] = 0
    front = [np.array([u]), np.array([v])]
    depth = [0, 0]
    while len(front[0]) and len(front[1]):
        # expand the cheaper side
        side = 0 if g.degrees[front[0]].sum() <= g.degrees[front[1]].sum() else 1
        nbrs = g.owner[g.partner[g.stubs_of(front[side])]]
        other = dist[1 - side][nbrs]
        met = other >= 0
        if met.any():
            return depth[side] + 1 + int(other[met].min())
        nbrs = np.unique(nbrs)
        nbrs = nbrs[dist[side][nbrs] < 0]
        depth[side] += 1
        dist[side][nbrs] = depth[side]
        front[side] = nbrs
    raise NotConnected(f"{u} and {v} are in different components")
