"""Shortest-weight graph growth on the configuration model.

Two pairing contexts drive the same three-case growth:

* process mode (:class:`ProcessPairing`): the graph is not built up front.
  Each step picks a uniform allowed stub, and a real stub is matched to a
  uniform free stub.  This is the annealed construction, valid by the
  memoryless property of the Exp(1) weights.
* realized mode (:class:`~fppcm.oracle.WeightedGraph`): the weighted graph is
  fixed and each step pops the allowed stub with the smallest tentative
  distance, so the growth is Dijkstra at stub level.

Step ``k`` chooses among ``S_k`` allowed stubs at time
``T_k = sum_{i<=k} E_i / S_i`` (``S_1`` is the source degree).  The cases are

1. real stub matched outside the SWG: a new real vertex with forward degree ``B``;
2. real stub matched to another allowed stub of the same SWG: the cycle is cut
   and the partner becomes an artificial stub, ``B = 0``;
3. artificial stub chosen: it is dropped, ``B = 0``.

In bilateral growth a real stub of the second SWG matched to the first SWG
is the connecting edge.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import Exhausted, NotConnected
from .graph import MultiGraph, bfs_distance, pairs_to_partner, stub_layout
from .oracle import WeightedGraph
from .rng import UniformBuffer

FRESH, CYCLE, ARTIFICIAL, CONNECT = 1, 2, 3, 4


class ProcessPairing:
    """Pool of unpaired stubs for the annealed construction.

    Free stubs live in an index array with swap-remove, so uniform choice and
    deletion are O(1).
    """

    def __init__(self, degrees):
        self.degrees = np.asarray(degrees, dtype=np.int64)
        self.offsets, self.owner = stub_layout(self.degrees)
        n_stubs = len(self.owner)
        if n_stubs & 1:
            raise ValueError("odd stub total")
        self.free = np.arange(n_stubs, dtype=np.int64)
        self.pos = np.arange(n_stubs, dtype=np.int64)
        self.n_free = n_stubs
        self.first: list[int] = []
        self.second: list[int] = []

    @property
    def n(self) -> int:
        return len(self.degrees)

    def stubs(self, v: int) -> range:
        return range(int(self.offsets[v]), int(self.offsets[v + 1]))

    def _remove(self, s: int) -> None:
        i = int(self.pos[s])
        last = self.n_free - 1
        t = int(self.free[last])
        self.free[i] = t
        self.pos[t] = i
        self.free[last] = s
        self.pos[s] = last
        self.n_free = last

    def pair(self, s: int, buf: UniformBuffer) -> int:
        """Match free stub ``s`` with a uniform other free stub and return it."""
        self._remove(s)
        p = int(self.free[buf.index(self.n_free)])
        self._remove(p)
        self.first.append(s)
        self.second.append(p)
        return p

    def complete(self, rng: np.random.Generator) -> MultiGraph:
        """Finish the matching uniformly; pairs made so far keep the first edge ids."""
        rest = rng.permutation(self.free[: self.n_free])
        first = np.concatenate([np.asarray(self.first, dtype=np.int64), rest[0::2]])
        second = np.concatenate([np.asarray(self.second, dtype=np.int64), rest[1::2]])
        partner, edge_of = pairs_to_partner(first, second, len(self.owner))
        return MultiGraph(self.degrees, partner, edge_of)


@dataclass
class SwgState:
    """Growth record of one shortest-weight graph.

    ``B[0]`` and ``S[0]`` describe the source (``B_1 = S_1 = D_source``);
    entry ``k`` holds ``B`` and ``S`` after growth step ``k``.
    """

    source: int
    label: int = 1
    hop: dict = field(default_factory=dict)
    dist: dict = field(default_factory=dict)
    artificial: set = field(default_factory=set)
    B: list = field(default_factory=list)
    S: list = field(default_factory=list)
    cases: list = field(default_factory=list)
    times: list = field(default_factory=list)
    chosen_generation: list = field(default_factory=list)
    R: dict = field(default_factory=dict)
    vertices: list = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.cases)

    @property
    def time(self) -> float:
        return self.times[-1] if self.times else 0.0

    @property
    def real_vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def n_allowed(self) -> int:
        return self.S[-1]

    def _add_vertex(self, v: int, hop: int, dist: float) -> None:
        self.hop[v] = hop
        self.dist[v] = dist
        self.vertices.append(v)
        if len(self.vertices) == 1:
            self.R[0] = 0

    def _record(self, case: int, b: int, s_after: int, t: float, gen: int) -> None:
        self.cases.append(case)
        self.B.append(b)
        self.S.append(s_after)
        self.times.append(t)
        self.chosen_generation.append(gen)
        if case == FRESH:
            self.R[len(self.vertices) - 1] = self.steps

    def overshoot(self) -> int:
        """Steps that did not add a real vertex."""
        return self.steps - (self.real_vertex_count - 1)


@dataclass
class StepOutcome:
    case: int
    chosen: int
    paired: int = -1
    vertex: int = -1


class _ProcessGrowth:
    def __init__(self, pool: ProcessPairing, source: int, label: int, members: dict, buf: UniformBuffer):
        self.pool = pool
        self.buf = buf
        self.members = members
        self.state = SwgState(source, label)
        self.allowed: list[int] = []
        self.apos: dict[int, int] = {}
        members[source] = label
        self.state._add_vertex(source, 0, 0.0)
        for s in pool.stubs(source):
            self._push(s)
        d = int(pool.degrees[source])
        self.state.B.append(d)
        self.state.S.append(d)

    def _push(self, s: int) -> None:
        self.apos[s] = len(self.allowed)
        self.allowed.append(s)

    def _pop_at(self, i: int) -> int:
        s = self.allowed[i]
        last = self.allowed.pop()
        if last != s:
            self.allowed[i] = last
            self.apos[last] = i
        del self.apos[s]
        return s

    def size(self) -> int:
        return len(self.allowed)

    def step(self) -> StepOutcome:
        st = self.state
        n_allowed = len(self.allowed)
        if n_allowed == 0:
            raise Exhausted(f"SWG from {st.source} has no allowed stubs after {st.steps} steps")
        t = st.time + self.buf.exponential() / n_allowed
        s = self._pop_at(self.buf.index(n_allowed))
        owner = self.pool.owner
        u = int(owner[s])
        gen = st.hop[u] + 1
        if s in st.artificial:
            st.artificial.discard(s)
            st._record(ARTIFICIAL, 0, len(self.allowed), t, gen)
            return StepOutcome(ARTIFICIAL, s)
        p = self.pool.pair(s, self.buf)
        y = int(owner[p])
        lab = self.members.get(y)
        if lab is None:
            self.members[y] = st.label
            st._add_vertex(y, gen, t)
            for q in self.pool.stubs(y):
                if q != p:
                    self._push(q)
            st._record(FRESH, int(self.pool.degrees[y]) - 1, len(self.allowed), t, gen)
            return StepOutcome(FRESH, s, p, y)
        if lab == st.label:
            st.artificial.add(p)
            st._record(CYCLE, 0, len(self.allowed), t, gen)
            return StepOutcome(CYCLE, s, p, y)
        st._record(CONNECT, 0, len(self.allowed), t, gen)
        return StepOutcome(CONNECT, s, p, y)


class _RealizedGrowth:
    def __init__(
        self,
        wg: WeightedGraph,
        source: int,
        label: int,
        members: dict,
        other: SwgState | None = None,
        other_time: float = 0.0,
    ):
        self.g = wg.base
        self.w_stub = wg.weights[self.g.edge_of]
        self.members = members
        self.other = other
        self.other_time = other_time
        self.state = SwgState(source, label)
        self.heap: list[tuple[float, int]] = []
        members[source] = label
        self.state._add_vertex(source, 0, 0.0)
        self._push_stubs(source, 0.0, skip=-1)
        d = int(self.g.degrees[source])
        self.state.B.append(d)
        self.state.S.append(d)

    def _push_stubs(self, v: int, dv: float, skip: int) -> None:
        g = self.g
        for q in range(int(g.offsets[v]), int(g.offsets[v + 1])):
            if q == skip:
                continue
            key = dv + float(self.w_stub[q])
            if self.other is not None:
                z = int(g.owner[g.partner[q]])
                if self.members.get(z) == self.other.label:
                    # the other SWG already spent part of this edge
                    key -= self.other_time - self.other.dist[z]
            heapq.heappush(self.heap, (key, q))

    def size(self) -> int:
        return len(self.heap)

    def step(self) -> StepOutcome:
        st = self.state
        if not self.heap:
            raise Exhausted(f"SWG from {st.source} has no allowed stubs after {st.steps} steps")
        t, s = heapq.heappop(self.heap)
        g = self.g
        u = int(g.owner[s])
        gen = st.hop[u] + 1
        if s in st.artificial:
            st.artificial.discard(s)
            st._record(ARTIFICIAL, 0, len(self.heap), t, gen)
            return StepOutcome(ARTIFICIAL, s)
        p = int(g.partner[s])
        y = int(g.owner[p])
        lab = self.members.get(y)
        if lab is None:
            self.members[y] = st.label
            st._add_vertex(y, gen, t)
            self._push_stubs(y, t, skip=p)
            st._record(FRESH, int(g.degrees[y]) - 1, len(self.heap), t, gen)
            return StepOutcome(FRESH, s, p, y)
        if lab == st.label:
            st.artificial.add(p)
            st._record(CYCLE, 0, len(self.heap), t, gen)
            return StepOutcome(CYCLE, s, p, y)
        st._record(CONNECT, 0, len(self.heap), t, gen)
        return StepOutcome(CONNECT, s, p, y)


def _growth(ctx, source: int, label: int, members: dict, buf, other=None, other_time=0.0):
    if isinstance(ctx, ProcessPairing):
        if buf is None:
            raise ValueError("process mode needs a random stream")
        return _ProcessGrowth(ctx, source, label, members, buf)
    if isinstance(ctx, WeightedGraph):
        return _RealizedGrowth(ctx, source, label, members, other, other_time)
    raise TypeError(f"unsupported pairing context {type(ctx).__name__}")


def _as_buffer(rng) -> UniformBuffer | None:
    if rng is None or isinstance(rng, UniformBuffer):
        return rng
    return UniformBuffer(rng)


def grow_single(ctx, source: int, steps: int, rng=None) -> SwgState:
    """Grow ``steps`` steps from ``source``; raises Exhausted if the allowed stubs run out."""
    grower = _growth(ctx, source, 1, {}, _as_buffer(rng))
    for _ in range(steps):
        grower.step()
    return grower.state


@dataclass
class BilateralResult:
    a_n_used: int
    ce: int | None = None
    h1: int | None = None
    h2: int | None = None
    wn: float | None = None
    collision_vertex: int | None = None
    discarded: bool = False
    reason: str = ""
    bfs_dist: int | None = None
    r_overshoot: int | None = None
    swg1: SwgState | None = field(default=None, repr=False)
    swg2: SwgState | None = field(default=None, repr=False)

    @property
    def hn(self) -> int | None:
        if self.h1 is None:
            return None
        return self.h1 + self.h2


def grow_bilateral(ctx, src1: int, src2: int, a_n: int, rng=None, keep_states: bool = False) -> BilateralResult:
    """Grow the SWG of ``src1`` for ``a_n`` steps, then the SWG of ``src2`` until they connect.

    Disconnected pairs come back with ``discarded=True`` and a reason instead
    of raising.
    """
    if src1 == src2:
        raise ValueError("sources must differ")
    if a_n < 1:
        raise ValueError("a_n must be positive")
    buf = _as_buffer(rng)
    members: dict[int, int] = {}
    res = BilateralResult(a_n)
    g1 = _growth(ctx, src1, 1, members, buf)
    exhausted = False
    for _ in range(a_n):
        if g1.size() == 0:
            exhausted = True
            break
        g1.step()
    s1 = g1.state
    res.r_overshoot = s1.overshoot()
    if keep_states:
        res.swg1 = s1
    if members.get(src2) == 1:
        res.ce, res.h1, res.h2 = 0, s1.hop[src2], 0
        res.wn = s1.dist[src2]
        res.collision_vertex = src2
        return res
    if exhausted:
        res.discarded, res.reason = True, "not_connected"
        return res
    g2 = _growth(ctx, src2, 2, members, buf, other=s1, other_time=s1.time)
    if keep_states:
        res.swg2 = g2.state
    while True:
        if g2.size() == 0:
            res.discarded, res.reason = True, "not_connected"
            return res
        out = g2.step()
        if out.case == CONNECT:
            break
    s2 = g2.state
    res.ce = s2.steps
    res.h1 = s1.hop[out.vertex]
    res.h2 = s2.chosen_generation[-1]
    res.collision_vertex = out.vertex
    # process mode: the connecting edge weight is split over its two stubs
    res.wn = s1.time + s2.time
    return res


def bilateral_with_bfs(ctx, src1: int, src2: int, a_n: int, rng: np.random.Generator) -> BilateralResult:
    """:func:`grow_bilateral` plus the hop distance in the completed graph."""
    buf = UniformBuffer(rng)
    res = grow_bilateral(ctx, src1, src2, a_n, buf)
    g = ctx.complete(rng) if isinstance(ctx, ProcessPairing) else ctx.base
    try:
        res.bfs_dist = bfs_distance(g, src1, src2)
    except NotConnected:
        res.bfs_dist = None
    return res


def first_forward_degree(pool: ProcessPairing, source: int, rng) -> int:
    """Forward degree of the first real vertex reached from ``source``."""
    grower = _ProcessGrowth(pool, source, 1, {}, _as_buffer(rng))
    while True:
        out = grower.step()
        if out.case == FRESH:
            return grower.state.B[-1]


def exchangeable_marginal(degrees, source: int) -> np.ndarray:
    """``P(B = j) = (j+1) #{i != source: D_i = j+1} / (L_n - D_source)`` for ``j = 0..max``."""
    d = np.asarray(degrees, dtype=np.int64)
    others = np.delete(d, source)
    counts = np.bincount(others, minlength=int(d.max()) + 1)
    k = np.arange(len(counts))
    mass = k * counts / float(d.sum() - d[source])
    return mass[1:]


def forward_degrees(pool: ProcessPairing, source: int, steps: int, rng) -> list[int]:
    """``B_2..B_{steps+1}`` of a process-mode SWG (zeros for cycle and artificial steps)."""
    st = grow_single(pool, source, steps, rng)
    return st.B[1:]


@dataclass
class ConnectionTimeStats:
    scaled: np.ndarray
    a_n: int
    reference_mean: float | None = None
    ks: float | None = None
    pvalue: float | None = None


def connection_time_stats(results, dist, n: int, reference: bool = True) -> ConnectionTimeStats:
    """``CE_n / a_n`` over kept results, with the KS distance to Exp(mean ``mu/(nu-1)``).

    The exponential reference only exists for finite ``nu``; asking for it
    otherwise raises :class:`InfiniteNu`.
    """
    from scipy import stats as sps

    from .errors import EmptyInput, InfiniteNu
    from .stats import a_n as a_n_of
    from .stats import ks_one_sample

    ce = [r.ce for r in results if not r.discarded and r.ce is not None]
    if not ce:
        raise EmptyInput("no kept bilateral results")
    an = a_n_of(dist, n)
    out = ConnectionTimeStats(np.asarray(ce, dtype=float) / an, an)
    if not reference:
        return out
    nu = dist.nu
    if not (np.isfinite(nu) and dist.tau_effective > 3.0):
        raise InfiniteNu("the exponential connection-time law needs tau > 3")
    mean = dist.mu / (nu - 1.0)
    test = ks_one_sample(out.scaled, sps.expon(scale=mean).cdf)
    out.reference_mean, out.ks, out.pvalue = mean, test.statistic, test.pvalue
    return out
