"""Limit variables of the branching-process approximation.

``Z(t)`` is the number of alive individuals of a Markov branching process with
Exp(1) lifetimes where the root has ``D ~ F`` children and every later
individual has ``B ~ g`` children.  ``Z(t) exp(-(nu-1) t)`` converges to ``W``.

The discrete embedding has ``s_{i+1} = s_i + B_{i+1} - 1`` alive individuals on
``[T_i, T_{i+1})`` with ``T_i - T_{i-1} = E_i / s_i``.  ``W`` is estimated at the
first jump after which at least ``population_cap`` individuals are alive, as
``s_{i+1} exp(-(nu-1) T_i)``.  That is the martingale stopped at a stopping
time, so the estimate is unbiased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .degrees import DegreeDistribution
from .errors import FiniteNuMisuse, InfiniteNu, IntegrationFailure

EULER_GAMMA = float(np.euler_gamma)

# elements per block in the vectorized embedding
_BLOCK = 1 << 22


@dataclass
class XSample:
    value: float
    terms: int
    tail_bound: float


class LimitLawSamplers:
    def __init__(
        self,
        dist: DegreeDistribution,
        population_cap: int = 100_000,
        x_tolerance: float = 1e-9,
        x_run: int = 100,
        x_max_terms: int = 10_000_000,
    ):
        if population_cap < 1000:
            raise ValueError("population_cap must be at least 1000")
        self.dist = dist
        self.sb = dist.size_biased
        self.mu = dist.mu
        self.nu = dist.nu
        self.population_cap = int(population_cap)
        self.x_tolerance = x_tolerance
        self.x_run = x_run
        self.x_max_terms = x_max_terms

    def _require_finite_nu(self) -> float:
        nu = self.nu
        if not math.isfinite(nu) or nu <= 1.0:
            raise InfiniteNu(f"needs 1 < nu < inf, got nu = {nu}")
        return nu

    # -- W ---------------------------------------------------------------

    def root_sizes(self, rng: np.random.Generator, size: int, root: str = "F") -> np.ndarray:
        """Alive individuals at time 0: ``D ~ F``, ``B ~ g`` or a single individual."""
        if root == "F":
            return np.asarray(self.dist.sample(rng, size), dtype=float)
        if root == "g":
            return np.asarray(self.sb.sample(rng, size), dtype=float)
        if root == "one":
            return np.ones(size)
        raise ValueError(f"unknown root law {root!r}")

    def martingale_limits(self, rng: np.random.Generator, size: int, root: str = "F") -> np.ndarray:
        """``size`` independent estimates of the martingale limit; 0 on extinction."""
        nu1 = self._require_finite_nu() - 1.0
        return self._embed(self.root_sizes(rng, size, root), nu1, rng)

    def _embed(self, start: np.ndarray, nu1: float, rng: np.random.Generator) -> np.ndarray:
        cap = float(self.population_cap)
        out = np.empty(len(start))
        s = start.astype(float).copy()
        t = np.zeros(len(start))
        done = s >= cap
        out[done] = s[done]
        dead = s <= 0
        out[dead] = 0.0
        active = np.flatnonzero(~(done | dead))
        while active.size:
            gap = cap - s[active].min()
            want = int(gap / nu1 * 1.25) + 32
            k = max(16, min(want, _BLOCK // active.size))
            b = self.sb.sample(rng, (active.size, k)).astype(float)
            path = s[active, None] + np.cumsum(b - 1.0, axis=1)
            before = np.concatenate([s[active, None], path[:, :-1]], axis=1)
            e = rng.standard_exponential((active.size, k))
            with np.errstate(divide="ignore", invalid="ignore"):
                times = t[active, None] + np.cumsum(e / before, axis=1)
            hit = (path >= cap) | (path <= 0)
            stopped = hit.any(axis=1)
            j = np.argmax(hit, axis=1)
            rows = active[stopped]
            js = j[stopped]
            r_idx = np.flatnonzero(stopped)
            ps = path[r_idx, js]
            out[rows] = np.where(ps > 0, ps * np.exp(-nu1 * times[r_idx, js]), 0.0)
            keep = ~stopped
            s[active[keep]] = path[keep, -1]
            t[active[keep]] = times[keep, -1]
            active = active[keep]
        return out

    def sample_W(self, rng: np.random.Generator) -> float:
        return float(self.martingale_limits(rng, 1)[0])

    def sample_W_positive(self, rng: np.random.Generator, size: int, root: str = "F") -> np.ndarray:
        """Martingale limits conditioned on survival (rejection)."""
        out = self.martingale_limits(rng, size, root)
        bad = out <= 0
        tries = 0
        while bad.any():
            tries += 1
            if tries > 1000:
                raise RuntimeError("survival probability too small for rejection")
            out[bad] = self.martingale_limits(rng, int(bad.sum()), root)
            bad = out <= 0
        return out

    def decomposed_W(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``W = sum_{j<=D} exp(-(nu-1) xi_j) W'_j``.

        ``W'_j`` is the limit of the subtree of the ``j``-th child of the root:
        that child lives ``xi_j`` and then has ``B ~ g`` children, so ``W'_j``
        comes from a process started with ``B`` individuals.
        """
        nu1 = self._require_finite_nu() - 1.0
        d = np.asarray(self.dist.sample(rng, size), dtype=np.int64)
        total = int(d.sum())
        sub = self.martingale_limits(rng, total, root="g")
        xi = -np.log1p(-rng.random(total))
        terms = np.exp(-nu1 * xi) * sub
        owner = np.repeat(np.arange(size), d)
        return np.bincount(owner, weights=terms, minlength=size)

    # -- V for tau > 3 -----------------------------------------------------

    def compose_V(self, w1, w2, m):
        """``V = -log W1/(nu-1) - log W2/(nu-1) + Lambda/(nu-1) + log(mu (nu-1))/(nu-1)``."""
        nu1 = self._require_finite_nu() - 1.0
        lam = np.log(nu1 * np.asarray(m) / self.mu)
        return (-np.log(w1) - np.log(w2) + lam + math.log(self.mu * nu1)) / nu1

    def sample_M(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Connection-time limit: exponential with mean ``mu/(nu-1)``."""
        nu1 = self._require_finite_nu() - 1.0
        return rng.exponential(self.mu / nu1, size)

    def sample_Lambda(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``log((nu-1) M / mu)``; the log of an Exp(1) variable."""
        nu1 = self._require_finite_nu() - 1.0
        return np.log(nu1 * self.sample_M(rng, size) / self.mu)

    def sample_V_tau_gt3(self, rng: np.random.Generator, size: int | None = None):
        self._require_finite_nu()
        k = 1 if size is None else size
        w1 = self.sample_W_positive(rng, k)
        w2 = self.sample_W_positive(rng, k)
        v = self.compose_V(w1, w2, self.sample_M(rng, k))
        return float(v[0]) if size is None else v

    # -- X for 2 < tau < 3 -------------------------------------------------

    def sample_X(self, rng: np.random.Generator) -> XSample:
        """Explosion time ``sum_i E_i / S_i`` with ``S_i = D + sum_{j=2}^i (B_j - 1)``.

        Summation stops after ``x_run`` consecutive increments below
        ``x_tolerance``.  ``tail_bound`` estimates the neglected tail from the growth
        ``S_k ~ k**(1/(tau-2))``: ``sum_{k>i} 1/S_k ~ i (tau-2) / ((3-tau) S_i)``.
        """
        tau = self.dist.tau_effective
        if not 2.0 < tau < 3.0:
            raise FiniteNuMisuse(f"explosion time needs 2 < tau < 3, got {tau}")
        s = float(self.dist.sample(rng))
        total = 0.0
        run = 0
        i = 0
        chunk = 256
        last = s
        while i < self.x_max_terms:
            b = self.sb.sample(rng, chunk).astype(float)
            e = -np.log1p(-rng.random(chunk))
            # S_i for the next chunk: the first uses the current s
            svals = s + np.concatenate([[0.0], np.cumsum(b[:-1] - 1.0)])
            inc = e / svals
            small = inc < self.x_tolerance
            # position where a run of x_run small increments completes
            runs = _run_end(small, run, self.x_run)
            if runs >= 0:
                total += float(inc[: runs + 1].sum())
                i += runs + 1
                last = float(svals[runs])
                break
            total += float(inc.sum())
            i += chunk
            last = float(svals[-1])
            run = _trailing_run(small, run)
            s = svals[-1] + b[-1] - 1.0
            chunk = min(chunk * 2, 1 << 16)
        return XSample(total, i, i * (tau - 2.0) / ((3.0 - tau) * last))

    def sample_X_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.array([self.sample_X(rng).value for _ in range(size)])

    # -- Laplace transform ---------------------------------------------------

    def phi_inverse(self, x: float, tol: float = 1e-8) -> float:
        """``(1-x) exp{ int_1^x [(nu-1)/(h(s)-s) + 1/(1-s)] ds }`` for ``0 < x < 1``.

        The two poles at ``s = 1`` cancel, leaving an integrable (at most
        logarithmic) singularity.  Roundoff dominates within ``EDGE`` of 1, so
        that last piece is estimated by one evaluation.
        """
        nu1 = self._require_finite_nu() - 1.0
        edge = 1e-8

        def integrand(s):
            one_s = 1.0 - s
            hs = one_s - self.sb.one_minus_pgf(s)  # h(s) - s
            return nu1 / hs + 1.0 / one_s

        upper = 1.0 - edge
        if x >= upper:
            return (1.0 - x) * math.exp(-(1.0 - x) * integrand(upper))
        val, err, info, *msg = integrate.quad(
            integrand, x, upper, epsabs=tol, epsrel=tol, limit=200, full_output=1
        )
        if msg or not math.isfinite(val) or err > max(100 * tol, 1e-8 * abs(val)):
            raise IntegrationFailure(f"quadrature did not converge at x={x}: error {err:g}")
        val += edge * integrand(upper)
        return (1.0 - x) * math.exp(-val)

    def phi(self, t: float) -> float:
        """Laplace transform of the one-individual limit, by inverting ``phi_inverse``."""
        if t <= 0:
            return 1.0
        f = lambda x: self.phi_inverse(x) - t
        hi = 1.0 - 1e-12
        lo = 0.5
        while f(lo) < 0:
            hi = lo
            lo /= 2.0
            if lo < 1e-300:
                raise IntegrationFailure(f"cannot bracket phi at t={t}")
        return optimize.brentq(f, lo, hi, xtol=1e-14)

    def laplace_check(
        self,
        t_values,
        rng: np.random.Generator,
        samples: int = 100_000,
        bootstrap: int = 200,
    ) -> dict:
        """Compare ``phi`` with the empirical transform of one-individual limits.

        Returns the max discrepancy plus per-t values and bootstrap SEs.
        """
        w = self.martingale_limits(rng, samples, root="one")
        rows = []
        idx = rng.integers(0, samples, size=(bootstrap, samples))
        for t in t_values:
            ew = np.exp(-t * w)
            emp = float(ew.mean())
            se = float(ew[idx].mean(axis=1).std(ddof=1))
            theo = self.phi(t)
            rows.append({"t": float(t), "phi": theo, "empirical": emp, "se": se, "gap": abs(theo - emp)})
        return {"max_gap": max(r["gap"] for r in rows), "rows": rows}


def _run_end(small: np.ndarray, carried: int, need: int) -> int:
    """Index where ``need`` consecutive True values complete (counting ``carried``), or -1."""
    run = carried
    # fast path: no small values at all
    if not small.any():
        return -1
    for i, flag in enumerate(small.tolist()):
        run = run + 1 if flag else 0
        if run >= need:
            return i
    return -1


def _trailing_run(small: np.ndarray, carried: int) -> int:
    if small.all():
        return carried + len(small)
    return len(small) - 1 - int(np.flatnonzero(~small)[-1])
