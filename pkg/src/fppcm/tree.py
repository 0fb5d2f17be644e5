"""Flow from the root of a tree with prescribed offspring counts.

The root dies at time 0 leaving ``d_1`` children.  Every alive vertex carries
an Exp(1) lifetime; the ``i``-th death after the root happens at ``T_i`` and the
dying vertex leaves ``d_{i+1}`` children.  With ``s_i = d_1 + ... + d_i - (i-1)``
alive vertices after step ``i``:

    G_m = sum_{i<=m} I_i,  I_i ~ Bernoulli(d_i / s_i)
    T_m = sum_{i<=m} E_i / s_i

``G_m`` is the generation of a uniform alive vertex after ``m`` steps, which is
also the next vertex to die, and ``T_m`` is its death time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DeadProcess


def s_values(degrees) -> np.ndarray:
    d = np.asarray(degrees, dtype=np.int64)
    if d.size == 0:
        raise ValueError("empty degree vector")
    return np.cumsum(d) - np.arange(d.size)


def _checked_s(degrees, m: int) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(degrees, dtype=np.int64)[:m]
    if m < 1 or len(d) < m:
        raise ValueError(f"need 1 <= m <= {len(degrees)}, got {m}")
    s = s_values(d)
    dead = np.flatnonzero(s < 1)
    if dead.size:
        raise DeadProcess(f"no alive vertex after step {dead[0] + 1}")
    return d, s


@dataclass
class TreeFlowTrace:
    degrees: np.ndarray
    alive_counts: np.ndarray
    indicators: np.ndarray
    exponentials: np.ndarray
    generation: int = field(init=False)
    weight: float = field(init=False)

    def __post_init__(self):
        self.generation = int(self.indicators.sum())
        self.weight = float((self.exponentials / self.alive_counts).sum())

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "d_i", "s_i", "I_i", "E_i"])
        for i, row in enumerate(zip(self.degrees, self.alive_counts, self.indicators, self.exponentials), 1):
            d, s, ind, e = row
            w.writerow([i, int(d), int(s), int(ind), repr(float(e))])


def sample_trace(degrees, m: int, rng: np.random.Generator) -> TreeFlowTrace:
    d, s = _checked_s(degrees, m)
    u = rng.random(m)
    ind = (u * s < d).astype(np.int64)
    e = -np.log1p(-rng.random(m))
    return TreeFlowTrace(d, s, ind, e)


def sample_gm_tm(degrees, m: int, rng: np.random.Generator) -> tuple[int, float]:
    tr = sample_trace(degrees, m, rng)
    return tr.generation, tr.weight


def sample_gm_tm_batch(degrees, m: int, rng: np.random.Generator, runs: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``runs`` independent draws of ``(G_m, T_m)``."""
    d, s = _checked_s(degrees, m)
    g = (rng.random((runs, m)) * s < d).sum(axis=1)
    t = (-np.log1p(-rng.random((runs, m))) / s).sum(axis=1)
    return g, t


def exact_generation_pmf(degrees, m: int) -> dict[int, float]:
    """Law of ``G_m`` as the convolution of the Bernoulli laws."""
    d, s = _checked_s(degrees, m)
    pmf = np.array([1.0])
    for di, si in zip(d, s):
        p = di / si
        nxt = np.zeros(len(pmf) + 1)
        nxt[:-1] += (1.0 - p) * pmf
        nxt[1:] += p * pmf
        pmf = nxt
    return {k: float(v) for k, v in enumerate(pmf) if v > 0}


def recursion_generation_pmf(degrees, m: int) -> dict[int, float]:
    """Law of ``G_m`` from the one-step recursion on ``P(G_m = k)``."""
    d, s = _checked_s(degrees, m)
    prob = {1: 1.0}  # G_1 = 1
    for step in range(1, m):
        p = d[step] / s[step]
        nxt: dict[int, float] = {}
        for k in range(1, step + 2):
            val = p * prob.get(k - 1, 0.0) + (1.0 - p) * prob.get(k, 0.0)
            if val > 0:
                nxt[k] = val
        prob = nxt
    return prob


def simulate_construction(degrees, m: int, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Brute-force continuous-time tree.

    Keeps every alive vertex with its generation and absolute death time; at
    each step the vertex with the earliest death time dies and is replaced by
    its children.  Returns the generation of the vertex dying at step ``m`` and
    the split times ``T_1..T_m``.
    """
    g, t = simulate_construction_batch(degrees, m, rng, 1)
    return int(g[0]), t[0]


def simulate_construction_batch(degrees, m: int, rng: np.random.Generator, runs: int) -> tuple[np.ndarray, np.ndarray]:
    d, s = _checked_s(degrees, m)
    width = int(s.max())
    rows = np.arange(runs)
    gen = np.zeros((runs, width), dtype=np.int64)
    clock = np.full((runs, width), np.inf)
    n_alive = int(d[0])
    gen[:, :n_alive] = 1
    clock[:, :n_alive] = rng.exponential(size=(runs, n_alive))
    split = np.empty((runs, m))
    picked = np.empty(runs, dtype=np.int64)
    for i in range(m):
        j = np.argmin(clock[:, :n_alive], axis=1)
        now = clock[rows, j]
        split[:, i] = now
        picked = gen[rows, j]
        if i == m - 1:
            break
        # remove the dead vertex by moving the last alive one into its slot
        last = n_alive - 1
        gen[rows, j] = gen[:, last]
        clock[rows, j] = clock[:, last]
        clock[:, last] = np.inf
        n_alive -= 1
        kids = int(d[i + 1])
        if kids:
            gen[:, n_alive : n_alive + kids] = (picked + 1)[:, None]
            clock[:, n_alive : n_alive + kids] = now[:, None] + rng.exponential(size=(runs, kids))
            n_alive += kids
    return picked, split


def sample_ghat(forward: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``G-hat_m`` from forward degrees ``B_1..B_m`` (last axis) and uniforms.

    The ``i``-th indicator succeeds with probability ``B_i / (B_1 + ... + B_i)``;
    a zero denominator counts as success.
    """
    forward = np.asarray(forward, dtype=float)
    csum = np.cumsum(forward, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(csum > 0, forward / csum, 1.0)
    return (u < p).sum(axis=-1)


def coupled_generations(degrees, rng: np.random.Generator, runs: int) -> tuple[np.ndarray, np.ndarray]:
    """``(G_m, G-hat_m)`` from shared uniforms, ``m = len(degrees)``.

    ``degrees`` are ``(D, B_2, ..., B_m)``; ``G-hat`` uses the same vector.
    Since ``s_i <= d_1 + ... + d_i`` the Ĝ success probability is never larger,
    so ``G-hat <= G`` pathwise.
    """
    d, s = _checked_s(degrees, len(degrees))
    u = rng.random((runs, len(d)))
    g = (u * s < d).sum(axis=1)
    gh = sample_ghat(np.broadcast_to(d, u.shape), u)
    return g, gh


def harmonic_number(m: int) -> float:
    return float(np.sum(1.0 / np.arange(1, m + 1)))
