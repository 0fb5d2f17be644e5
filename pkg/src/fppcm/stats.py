"""Theory constants and the statistics used to compare simulations with them."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .degrees import DegreeDistribution
from .errors import CriticalTau, EmptyInput, InfiniteNu, InsufficientData


@dataclass(frozen=True)
class TheoryConstants:
    alpha: float
    beta: float
    gamma: float
    a_n_exponent: float
    mu: float
    nu: float
    tau: float

    @property
    def finite_variance(self) -> bool:
        return math.isfinite(self.nu)


def theory_constants(dist: DegreeDistribution) -> TheoryConstants:
    tau = dist.tau_effective
    if tau == 3.0:
        raise CriticalTau("tau = 3 is a boundary case with no limit theory")
    mu, nu = dist.mu, dist.nu
    if tau > 3.0:
        if not nu > 1.0:
            raise InfiniteNu(f"supercritical regime needs nu > 1, got {nu}")
        return TheoryConstants(nu / (nu - 1.0), nu / (nu - 1.0), 1.0 / (nu - 1.0), 0.5, mu, nu, tau)
    return TheoryConstants(2.0 * (tau - 2.0) / (tau - 1.0), 1.0, 0.0, (tau - 2.0) / (tau - 1.0), mu, nu, tau)


def a_n(dist: DegreeDistribution | TheoryConstants, n: int) -> int:
    """``ceil(n ** exponent)``; a power landing within 1e-9 of an integer counts as that integer."""
    if n < 2:
        raise ValueError("n must be at least 2")
    c = dist if isinstance(dist, TheoryConstants) else theory_constants(dist)
    x = n ** c.a_n_exponent
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, x):
        return max(1, int(r))
    return max(1, math.ceil(x))


# -- distances and tests ----------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    statistic: float
    pvalue: float
    dof: int | None = None


def _nonempty(x) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        raise EmptyInput("no samples")
    return a


def ks_one_sample(samples, cdf: Callable) -> TestResult:
    """Sup distance to ``cdf``; p-value from the asymptotic Kolmogorov law."""
    x = _nonempty(samples)
    d = float(sps.ks_1samp(x, cdf, method="asymp").statistic)
    return TestResult(d, float(sps.kstwobign.sf(math.sqrt(x.size) * d)))


def ks_two_sample(a, b) -> TestResult:
    x, y = _nonempty(a), _nonempty(b)
    d = float(sps.ks_2samp(x, y, method="asymp").statistic)
    en = math.sqrt(x.size * y.size / (x.size + y.size))
    return TestResult(d, float(sps.kstwobign.sf(en * d)))


def tv_distance(p, q) -> float:
    """Half the L1 distance between two pmfs (arrays or ``{value: prob}`` maps)."""
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        p, q = dict(p), dict(q)
        if not p or not q:
            raise EmptyInput("empty pmf")
        keys = set(p) | set(q)
        return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
    a, b = _nonempty(p), _nonempty(q)
    m = max(a.size, b.size)
    a = np.pad(a, (0, m - a.size))
    b = np.pad(b, (0, m - b.size))
    return 0.5 * float(np.abs(a - b).sum())


def empirical_pmf(values, support_size: int | None = None) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    if v.size == 0:
        raise EmptyInput("no samples")
    counts = np.bincount(v, minlength=support_size or 0)
    return counts / v.size


def lump_tail(pmf: np.ndarray, last: int) -> np.ndarray:
    """Keep entries ``0..last-1`` and put the remaining mass in entry ``last``."""
    pmf = np.asarray(pmf, dtype=float)
    out = np.zeros(last + 1)
    out[: min(last, pmf.size)] = pmf[:last]
    out[last] = max(0.0, 1.0 - out[:last].sum()) if pmf.size <= last else pmf[last:].sum()
    return out


def chi_square_gof(observed, expected_prob, min_expected: float = 5.0) -> TestResult:
    """Pearson goodness of fit; adjacent cells are merged until each expects ``min_expected``."""
    obs = np.asarray(observed, dtype=float)
    prob = np.asarray(expected_prob, dtype=float)
    if obs.size == 0 or obs.sum() == 0:
        raise EmptyInput("no observations")
    if obs.size != prob.size:
        raise ValueError("observed and expected have different lengths")
    total = obs.sum()
    exp = prob / prob.sum() * total
    o_cells, e_cells = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(obs, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            o_cells.append(o_acc)
            e_cells.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if e_cells:
            o_cells[-1] += o_acc
            e_cells[-1] += e_acc
        else:
            o_cells.append(o_acc)
            e_cells.append(e_acc)
    o_arr, e_arr = np.array(o_cells), np.array(e_cells)
    dof = len(o_arr) - 1
    if dof < 1:
        return TestResult(0.0, 1.0, 0)
    stat = float(((o_arr - e_arr) ** 2 / e_arr).sum())
    return TestResult(stat, float(sps.chi2.sf(stat, dof)), dof)


def pooled_chi_square(parts: Sequence[TestResult]) -> TestResult:
    """Independent chi-square tests combined by adding statistics and degrees of freedom."""
    parts = [p for p in parts if p.dof]
    if not parts:
        raise EmptyInput("no tests to pool")
    stat = math.fsum(p.statistic for p in parts)
    dof = sum(p.dof for p in parts)
    return TestResult(stat, float(sps.chi2.sf(stat, dof)), dof)


# -- regression and summaries -----------------------------------------------


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float


def weighted_line(x, y, se) -> LineFit:
    """Weighted least squares of ``y`` on ``x`` with weights ``1/se**2``."""
    x, y, se = (np.asarray(v, dtype=float) for v in (x, y, se))
    if x.size < 2:
        raise InsufficientData("need at least two points")
    pos = se[se > 0]
    # zero-variance points get the weight of the most precise other point
    floor = pos.min() if pos.size else 1.0
    w = 1.0 / np.where(se > 0, se, floor) ** 2
    X = np.column_stack([np.ones_like(x), x])
    A = X.T @ (w[:, None] * X)
    beta = np.linalg.solve(A, X.T @ (w * y))
    cov = np.linalg.inv(A)
    if x.size > 2:
        # rescale by the reduced chi-square so the SE reflects lack of fit too
        resid = y - X @ beta
        red = float((w * resid**2).sum() / (x.size - 2))
        cov = cov * max(red, 1.0)
    return LineFit(float(beta[1]), float(beta[0]), float(math.sqrt(cov[1, 1])), float(math.sqrt(cov[0, 0])))


@dataclass
class SummaryStats:
    per_n: dict = field(default_factory=dict)
    mean_fit: LineFit | None = None
    var_fit: LineFit | None = None
    ks_standardized: dict = field(default_factory=dict)
    ks_lattice: dict = field(default_factory=dict)
    weight_shift: dict = field(default_factory=dict)
    contrast: dict = field(default_factory=dict)
    trend: str = ""
    kept: int = 0
    discarded: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _moments(v: np.ndarray) -> dict:
    m = v.size
    mean = float(v.mean())
    var = float(v.var(ddof=1)) if m > 1 else 0.0
    m4 = float(((v - mean) ** 4).mean())
    var_se = math.sqrt(max(m4 - var**2, 0.0) / m) if m > 1 else math.inf
    return {"count": m, "mean": mean, "mean_se": math.sqrt(var / m) if m > 1 else math.inf, "var": var, "var_se": var_se}


def lattice_ks(values, mean: float, sd: float) -> float:
    """Sup distance between the empirical CDF of integer data and ``N(mean, sd^2)``.

    The normal CDF is evaluated at ``k + 1/2`` (continuity correction), which
    removes the ``O(1/sd)`` lattice jump from the raw statistic.
    """
    v = np.asarray(values, dtype=np.int64)
    if v.size == 0:
        raise EmptyInput("no samples")
    k = np.arange(int(v.min()) - 1, int(v.max()) + 1)
    emp = np.searchsorted(np.sort(v), k, side="right") / v.size
    ref = sps.norm.cdf((k + 0.5 - mean) / sd)
    return float(np.abs(emp - ref).max())


def clt_report(records: Mapping[int, Mapping[str, Sequence]], constants: TheoryConstants, min_replicates: int = 100) -> SummaryStats:
    """Mean and variance of ``Hn`` against ``log n``, plus standardized KS per ``n``.

    ``records`` maps ``n`` to a dict with at least ``hn`` (kept replicates) and
    optionally ``wn``, ``bfs`` and ``discarded``.
    """
    ns = sorted(records)
    if len(ns) < 2:
        raise InsufficientData("need at least two grid points")
    out = SummaryStats()
    logs, means, mses, vars_, vses = [], [], [], [], []
    alpha, gamma = constants.alpha, constants.gamma
    for n in ns:
        rec = records[n]
        h = np.asarray(rec["hn"], dtype=float)
        if h.size < min_replicates:
            raise InsufficientData(f"only {h.size} replicates at n={n}")
        row = _moments(h)
        ln = math.log(n)
        z = (h - alpha * ln) / math.sqrt(alpha * ln)
        out.ks_standardized[n] = ks_one_sample(z, sps.norm.cdf).statistic
        out.ks_lattice[n] = lattice_ks(h, alpha * ln, math.sqrt(alpha * ln))
        if "wn" in rec and len(rec["wn"]):
            w = np.asarray(rec["wn"], dtype=float) - gamma * ln
            out.weight_shift[n] = {"mean": float(w.mean()), "var": float(w.var(ddof=1))}
        out.per_n[n] = row
        out.kept += h.size
        out.discarded += int(rec.get("discarded", 0))
        logs.append(ln)
        means.append(row["mean"])
        mses.append(row["mean_se"])
        vars_.append(row["var"])
        vses.append(row["var_se"])
    out.mean_fit = weighted_line(logs, means, mses)
    out.var_fit = weighted_line(logs, vars_, vses)
    return out


def classify_trend(values: Sequence[float], tol: float = 1e-12) -> str:
    d = np.diff(np.asarray(values, dtype=float))
    if d.size == 0 or np.all(np.abs(d) <= tol):
        return "flat"
    if np.all(d > tol):
        return "increasing"
    if np.all(d < -tol):
        return "decreasing"
    return "mixed"


def distance_contrast(records: Mapping[int, Mapping[str, Sequence]], constants: TheoryConstants) -> SummaryStats:
    """Graph distance against its leading-order constant, and hopcount over graph distance."""
    ns = sorted(records)
    if not ns:
        raise InsufficientData("no records")
    out = SummaryStats()
    ratios = []
    for n in ns:
        rec = records[n]
        bfs = np.asarray(rec.get("bfs", []), dtype=float)
        hn = np.asarray(rec.get("hn", []), dtype=float)
        if bfs.size == 0 or hn.size == 0:
            raise InsufficientData(f"missing graph distances at n={n}")
        if constants.finite_variance:
            scale = math.log(n)
            ref = 1.0 / math.log(constants.nu)
        else:
            scale = math.log(math.log(n))
            ref = 2.0 / abs(math.log(constants.tau - 2.0))
        ratio = float(hn.mean() / bfs.mean())
        ratios.append(ratio)
        out.contrast[n] = {"bfs_mean": float(bfs.mean()), "scaled": float(bfs.mean() / scale), "reference": ref, "hop_ratio": ratio}
    out.trend = classify_trend(ratios)
    return out
