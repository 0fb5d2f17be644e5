"""Degree laws: the power-law family, finite explicit laws, and their size-biased companions.

The power-law family fixes the slowly varying factor to a constant, which gives
the survival function ``P(D >= k) = (2/k)**(tau-1)`` for integers ``k >= 2`` and
an exact inverse-CDF sampler ``D = max(2, floor(2 * U**(-1/(tau-1))))``.

Moments use Hurwitz zeta values, so they carry no truncation error:

    mu         = 2 + 2**(tau-1) * zeta(tau-1, 3)
    E[D(D-1)]  = 2 * (1 + 2**(tau-1) * (zeta(tau-2, 3) - zeta(tau-1, 3)))   (tau > 3)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.special import zeta

# Head of the size-biased table; draws beyond it go through an exact rejection step.
SIZE_BIASED_TABLE = 1 << 16
INT_CLAMP = 1 << 62


@dataclass(frozen=True)
class DegreeDistribution:
    """Law ``F`` of the vertex degrees.

    Build with :meth:`pareto` or :meth:`explicit`.  ``test_mode`` lets explicit
    laws put mass on degrees 0 and 1; the model itself assumes ``D >= 2``.
    """

    kind: str
    tau: float = math.inf
    support: tuple[int, ...] = ()
    probs: tuple[float, ...] = ()
    tail_tolerance: float = 1e-12
    test_mode: bool = False
    _cdf: np.ndarray = field(default=None, repr=False, compare=False)

    @classmethod
    def pareto(cls, tau: float, tail_tolerance: float = 1e-12) -> "DegreeDistribution":
        tau = float(tau)
        if not tau > 2:
            raise ValueError(f"power-law exponent must exceed 2, got {tau}")
        return cls("pareto", tau=tau, tail_tolerance=tail_tolerance)

    @classmethod
    def explicit(
        cls,
        pmf: Mapping[int, float],
        tail_tolerance: float = 1e-12,
        test_mode: bool = False,
    ) -> "DegreeDistribution":
        items = sorted((int(k), float(p)) for k, p in pmf.items() if float(p) > 0)
        if not items:
            raise ValueError("empty pmf")
        lowest = 0 if test_mode else 2
        if items[0][0] < lowest:
            raise ValueError(f"degrees below {lowest} need test_mode=True")
        if any(p < 0 for _, p in items):
            raise ValueError("negative probability")
        total = math.fsum(p for _, p in items)
        if abs(total - 1.0) > tail_tolerance:
            raise ValueError(f"pmf sums to {total!r}, not 1")
        support = tuple(k for k, _ in items)
        probs = tuple(p for _, p in items)
        cdf = np.cumsum(probs)
        dist = cls(
            "explicit",
            support=support,
            probs=probs,
            tail_tolerance=tail_tolerance,
            test_mode=test_mode,
        )
        object.__setattr__(dist, "_cdf", cdf)
        return dist

    @classmethod
    def from_spec(cls, spec: Mapping) -> "DegreeDistribution":
        """Build from ``{"kind": "pareto", "tau": 2.5}`` or ``{"kind": "explicit", "pmf": {...}}``."""
        kind = str(spec.get("kind", "")).lower()
        if kind == "pareto":
            return cls.pareto(float(spec["tau"]))
        if kind == "explicit":
            return cls.explicit(
                {int(k): float(v) for k, v in spec["pmf"].items()},
                test_mode=bool(spec.get("test_mode", False)),
            )
        raise ValueError(f"unknown distribution kind {kind!r}")

    @property
    def label(self) -> str:
        """Compact id used in CSV rows (no commas)."""
        if self.kind == "pareto":
            return f"pareto:{self.tau:.17g}"
        return "explicit:" + ";".join(f"{k}={p:.17g}" for k, p in zip(self.support, self.probs))

    # -- law ---------------------------------------------------------------

    def survival(self, k):
        """``P(D >= k)``."""
        k = np.asarray(k, dtype=float)
        if self.kind == "pareto":
            return np.where(k <= 2, 1.0, (2.0 / np.maximum(k, 2.0)) ** (self.tau - 1.0))
        sup = np.asarray(self.support, dtype=float)
        pr = np.asarray(self.probs)
        return np.array([pr[sup >= kk].sum() for kk in np.atleast_1d(k)]).reshape(k.shape)

    def pmf(self, k):
        k = np.asarray(k)
        if self.kind == "pareto":
            kf = k.astype(float)
            a = self.tau - 1.0
            val = (2.0 / np.maximum(kf, 2.0)) ** a - (2.0 / np.maximum(kf + 1.0, 3.0)) ** a
            return np.where(k >= 2, val, 0.0)
        lookup = dict(zip(self.support, self.probs))
        return np.vectorize(lambda x: lookup.get(int(x), 0.0), otypes=[float])(k)

    @cached_property
    def mu(self) -> float:
        if self.kind == "pareto":
            return 2.0 + 2.0 ** (self.tau - 1.0) * float(zeta(self.tau - 1.0, 3.0))
        return math.fsum(k * p for k, p in zip(self.support, self.probs))

    @cached_property
    def second_factorial_moment(self) -> float:
        """``E[D(D-1)]``; ``inf`` when ``tau <= 3``."""
        if self.kind == "pareto":
            if self.tau <= 3.0:
                return math.inf
            c = 2.0 ** (self.tau - 1.0)
            return 2.0 * (1.0 + c * (float(zeta(self.tau - 2.0, 3.0)) - float(zeta(self.tau - 1.0, 3.0))))
        return math.fsum(k * (k - 1) * p for k, p in zip(self.support, self.probs))

    @cached_property
    def nu(self) -> float:
        nu = self.second_factorial_moment / self.mu
        if self.kind == "explicit" and len(self.support) == 1:
            warnings.warn(f"degenerate degree law {self.label}: nu = {nu:g}", stacklevel=2)
        return nu

    @property
    def tau_effective(self) -> float:
        """Power-law exponent; finite-support laws behave like ``tau = inf``."""
        return self.tau if self.kind == "pareto" else math.inf

    @cached_property
    def size_biased(self) -> "SizeBiasedDistribution":
        return SizeBiasedDistribution(self)

    def sample(self, rng: np.random.Generator, size=None):
        """Exact inverse-CDF draws."""
        u = 1.0 - rng.random(size)  # (0, 1]
        if self.kind == "pareto":
            with np.errstate(over="ignore"):
                x = 2.0 * u ** (-1.0 / (self.tau - 1.0))
            d = np.floor(np.minimum(x, float(INT_CLAMP))).astype(np.int64)
            d = np.maximum(d, 2)
        else:
            idx = np.searchsorted(self._cdf, 1.0 - u, side="right")
            idx = np.minimum(idx, len(self.support) - 1)
            d = np.asarray(self.support, dtype=np.int64)[idx]
        return d if size is not None else int(d)


def moments(dist: DegreeDistribution) -> tuple[float, float]:
    """``(mu, nu)`` with ``nu = E[D(D-1)]/E[D]`` (``inf`` for ``tau <= 3``)."""
    return dist.mu, dist.nu


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    return dist.sample(rng)


class SizeBiasedDistribution:
    """Forward-degree law ``g_j = (j+1) f_{j+1} / mu``, ``j >= 0``.

    Sampling is inverse-CDF on a precomputed table of the first
    ``SIZE_BIASED_TABLE`` masses.  For the power law the remaining tail is drawn
    exactly by rejection: propose ``Y`` from the continuous size-biased Pareto
    restricted to ``[K, inf)``, set ``k = floor(Y)`` and accept with
    probability ``k/Y``; accepted values have law ``k f_k`` on ``k >= K``.
    """

    def __init__(self, base: DegreeDistribution):
        self.base = base
        mu = base.mu
        if base.kind == "pareto":
            j = np.arange(SIZE_BIASED_TABLE, dtype=float)
            g = (j + 1.0) * base.pmf(np.arange(1, SIZE_BIASED_TABLE + 1)) / mu
            k0 = float(SIZE_BIASED_TABLE + 1)  # first degree not in the table
            a = base.tau - 1.0
            # sum_{k >= k0} k f_k = k0 P(D >= k0) + sum_{k > k0} P(D >= k)
            tail = k0 * (2.0 / k0) ** a + 2.0**a * float(zeta(a, k0 + 1.0))
            self.tail_mass = tail / mu
        else:
            top = max(base.support)
            g = np.zeros(max(top, 1))
            for k, p in zip(base.support, base.probs):
                if k >= 1:
                    g[k - 1] += k * p / mu
            self.tail_mass = 0.0
        self.table = g
        self._cdf = np.cumsum(g)

    @property
    def mean(self) -> float:
        """``E[B] = nu``."""
        return self.base.nu

    def pmf(self, j):
        j = np.asarray(j)
        if self.base.kind == "pareto":
            return np.where(j >= 0, (j + 1.0) * self.base.pmf(j + 1) / self.base.mu, 0.0)
        out = np.zeros(j.shape, dtype=float)
        ok = (j >= 0) & (j < len(self.table))
        out[ok] = self.table[j[ok]]
        return out

    def total_mass(self) -> float:
        """Table mass plus the closed-form tail; equals 1 up to rounding."""
        return math.fsum(self.table.tolist()) + self.tail_mass

    @cached_property
    def _tail_bins(self) -> tuple[np.ndarray, np.ndarray]:
        """Mass and mean of ``B`` on log-spaced bins beyond the table (power law only).

        Both come from closed-form tail sums of ``D``, so the first moment of
        the tail is exact when ``tau > 3``.
        """
        if self.tail_mass == 0.0:
            return np.zeros(0), np.zeros(0)
        a = self.base.tau - 1.0
        mu = self.base.mu
        edges = np.unique(np.round(len(self.table) * 1.05 ** np.arange(0, 900)).astype(np.float64))
        edges = edges[edges < 2.0**62]

        def upper_mass(k):  # P(D* >= k) for the size-biased degree D* = B + 1
            return (k * (2.0 / k) ** a + 2.0**a * zeta(a, k + 1.0)) / mu

        def upper_first(k):  # E[D*; D* >= k]
            return (k * k * (2.0 / k) ** a + 2.0**a * (2.0 * zeta(a - 1.0, k + 1.0) - zeta(a, k + 1.0))) / mu

        lo = edges + 1.0  # bins in D* = B + 1
        m_up = np.append(upper_mass(lo), 0.0)
        mass = m_up[:-1] - m_up[1:]
        if self.base.tau > 3.0:
            f_up = np.append(upper_first(lo), 0.0)
            first = f_up[:-1] - f_up[1:]
            with np.errstate(invalid="ignore", divide="ignore"):
                mean = np.where(mass > 0, first / mass - 1.0, edges)
        else:
            mean = edges * 1.025
        return mass, mean

    def one_minus_pgf(self, s: float) -> float:
        """``1 - h(s)`` summed as ``sum_j g_j (1 - s**j)`` to avoid cancellation near ``s = 1``."""
        if s >= 1.0:
            return 0.0
        if s <= 0.0:
            return 1.0 - float(self.table[0])
        ls = math.log(s)
        j = np.arange(len(self.table), dtype=float)
        head = float(np.dot(self.table, -np.expm1(j * ls)))
        mass, mean = self._tail_bins
        return head + float(np.dot(mass, -np.expm1(mean * ls)))

    def pgf(self, s: float) -> float:
        """``h(s) = sum_j g_j s**j`` for ``0 <= s <= 1``."""
        return 1.0 - self.one_minus_pgf(s)

    def sample(self, rng: np.random.Generator, size=None):
        scalar = size is None
        u = rng.random(1 if scalar else size)
        out = np.searchsorted(self._cdf, u, side="right").astype(np.int64)
        over = out >= len(self.table)
        if over.any():
            if self.base.kind == "pareto" and self.tail_mass > 0:
                out[over] = self._sample_tail(rng, int(over.sum())) - 1
            else:
                # rounding at the top of a finite table
                out[over] = int(np.flatnonzero(self.table)[-1])
        return int(out[0]) if scalar else out

    def _sample_tail(self, rng: np.random.Generator, count: int) -> np.ndarray:
        k0 = float(SIZE_BIASED_TABLE + 1)
        shape = self.base.tau - 2.0
        res = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            need = count - filled
            u = 1.0 - rng.random(need)
            with np.errstate(over="ignore"):
                y = k0 * u ** (-1.0 / shape)
            y = np.minimum(y, float(INT_CLAMP))
            k = np.floor(y)
            keep = rng.random(need) * y < k
            got = k[keep].astype(np.int64)
            res[filled : filled + len(got)] = got
            filled += len(got)
        return res


def sample_size_biased(sb: SizeBiasedDistribution, rng: np.random.Generator) -> int:
    return sb.sample(rng)
