"""Reproducible random streams.

Every replicate gets its own generator, derived from ``(master_seed, stream,
n, replicate)`` through :class:`numpy.random.SeedSequence`.  The derivation
hashes its inputs, so the stream of a replicate does not depend on how
replicates are scheduled across workers.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def stream_id(name: str) -> int:
    """Stable 32-bit tag for a named experiment stream."""
    return zlib.crc32(name.encode("utf-8"))


def derive_seed(master_seed: int, stream: str, n: int, rep: int) -> int:
    """Counter-based 64-bit seed for one replicate.

    The seed is what gets written to the CSV; ``np.random.default_rng(seed)``
    replays the replicate exactly.
    """
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & MASK64,
        spawn_key=(stream_id(stream), int(n), int(rep)),
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def replicate_rng(master_seed: int, stream: str, n: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, stream, n, rep))


class UniformBuffer:
    """Block-buffered scalar draws from a numpy generator.

    Scalar calls into ``Generator`` cost about a microsecond each; the growth
    loops draw a few per step, so they pull from pre-generated blocks instead.
    Exponentials use ``-log(U)`` with ``U`` in ``(0, 1]``.
    """

    def __init__(self, rng: np.random.Generator, block: int = 1024):
        self.rng = rng
        self.block = block
        self._u: list[float] = []
        self._e: list[float] = []

    def uniform(self) -> float:
        """Uniform on ``[0, 1)``."""
        if not self._u:
            self._u = self.rng.random(self.block).tolist()
        return self._u.pop()

    def exponential(self) -> float:
        if not self._e:
            u = 1.0 - self.rng.random(self.block)
            self._e = (-np.log(u)).tolist()
        return self._e.pop()

    def index(self, k: int) -> int:
        """Uniform integer in ``[0, k)``."""
        i = int(self.uniform() * k)
        return i if i < k else k - 1
