"""Acceptance criteria: exact oracle checks plus loose Monte Carlo trend checks.

Every criterion is a function of a :class:`SuiteContext` returning a
:class:`CriterionResult`.  Tolerances are fixed here, before any run, and are
echoed into the report next to the measured values.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats as sps

from .degrees import DegreeDistribution
from .errors import Exhausted, FppError
from .experiments import group_by_n, run_fpp, write_csv
from .graph import sample_degree_sequence
from .limits import LimitLawSamplers
from .rng import replicate_rng
from .stats import (
    chi_square_gof,
    classify_trend,
    clt_report,
    distance_contrast,
    ks_two_sample,
    lump_tail,
    pooled_chi_square,
    theory_constants,
    tv_distance,
)
from .swg import ProcessPairing, connection_time_stats, exchangeable_marginal, first_forward_degree, forward_degrees
from .tree import exact_generation_pmf, harmonic_number, s_values, sample_ghat, simulate_construction_batch

CLT_GRID = tuple(2**k for k in range(10, 18))


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items() if not isinstance(v, (list, dict)))
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.title}  [{shown}] ({self.seconds:.1f}s)"


def _short(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


@dataclass
class SuiteContext:
    master_seed: int = 1
    scale: float = 1.0
    workers: int = 1
    out: Path | None = None
    _cache: dict = field(default_factory=dict)

    def reps(self, base: int, floor: int = 20) -> int:
        return max(floor, int(round(base * self.scale)))

    def rng(self, name: str) -> np.random.Generator:
        return replicate_rng(self.master_seed, f"validate-{name}", 0, 0)

    def fpp(self, tag: str, dist: DegreeDistribution, grid, reps: int, mode: str = "process", bfs: bool = False, oracle: bool = False):
        key = (tag, dist.label, tuple(grid), reps, mode, bfs, oracle)
        if key not in self._cache:
            recs = run_fpp(dist, grid, reps, self.master_seed, mode=mode, bfs=bfs, workers=self.workers, oracle=oracle)
            if self.out is not None:
                write_csv(recs, Path(self.out) / f"{tag}.csv")
            self._cache[key] = recs
        return self._cache[key]


def _rel(x: float, target: float) -> float:
    return abs(x - target) / abs(target)


# -- 1: tree flow ---------------------------------------------------------------


def valid_degree_vectors(max_len: int = 8, values=(0, 2, 3)) -> list[tuple[int, ...]]:
    """All vectors of length ``1..max_len`` over ``values`` that keep at least one vertex alive."""
    out = []
    for m in range(1, max_len + 1):
        for v in itertools.product(values, repeat=m):
            if (s_values(v) >= 1).all():
                out.append(v)
    return out


def criterion_tree_flow(ctx: SuiteContext) -> CriterionResult:
    vectors = valid_degree_vectors()
    total = ctx.reps(20_000_000, floor=200_000)
    runs = max(200, math.ceil(total / len(vectors)))
    rng = ctx.rng("tree-flow")
    chis, zs = [], []
    for v in vectors:
        m = len(v)
        g, t = simulate_construction_batch(v, m, rng, runs)
        pmf = exact_generation_pmf(v, m)
        top = max(pmf)
        obs = np.bincount(g, minlength=top + 1)[: top + 1]
        if obs.sum() != runs:
            chis.append(None)  # generation outside the support
            continue
        exp = np.array([pmf.get(k, 0.0) for k in range(top + 1)])
        keep = exp > 0
        chis.append(chi_square_gof(obs[keep], exp[keep]))
        s = s_values(v).astype(float)
        mean, var = float(np.sum(1.0 / s)), float(np.sum(1.0 / s**2))
        zs.append((float(t[:, -1].mean()) - mean) / math.sqrt(var / runs))
    impossible = sum(c is None for c in chis)
    pooled = pooled_chi_square([c for c in chis if c is not None])
    z = np.array(zs)
    z_pooled = float(z.sum() / math.sqrt(z.size))
    z_sq = float(sps.chi2.sf((z**2).sum(), z.size))
    ok = impossible == 0 and pooled.pvalue > 1e-3 and abs(z_pooled) <= 3.0 and z_sq > 1e-3
    return CriterionResult(1, "tree-flow generation law and split times", ok, {
        "vectors": len(vectors), "runs_per_vector": runs, "chi2_pvalue": pooled.pvalue, "chi2_dof": pooled.dof,
        "T_pooled_z": z_pooled, "T_sum_z2_pvalue": z_sq, "T_max_abs_z": float(np.abs(z).max()), "off_support": impossible,
    })


# -- 2: harmonic identity -----------------------------------------------------------


def criterion_harmonic(ctx: SuiteContext) -> CriterionResult:
    dist = DegreeDistribution.pareto(2.5)
    runs, m = ctx.reps(100_000), 100
    rng = ctx.rng("harmonic")
    vals = []
    for lo in range(0, runs, 10_000):
        k = min(10_000, runs - lo)
        b = dist.size_biased.sample(rng, (k, m))
        vals.append(sample_ghat(b, rng.random((k, m))))
    g = np.concatenate(vals).astype(float)
    mean, se = float(g.mean()), float(g.std(ddof=1) / math.sqrt(g.size))
    target = harmonic_number(m)
    z = (mean - target) / se
    return CriterionResult(2, "harmonic identity for G-hat_100", abs(z) <= 3.0, {"runs": runs, "mean": mean, "target": target, "se": se, "z": z})


# -- 3: SWG against Dijkstra ------------------------------------------------------


def criterion_dijkstra(ctx: SuiteContext) -> CriterionResult:
    reps = ctx.reps(1000)
    checked = bad = 0
    cells = {}
    for tau in (2.5, 4.0):
        dist = DegreeDistribution.pareto(tau)
        for n in (100, 1000):
            recs = ctx.fpp(f"c3_tau{tau:g}_n{n}", dist, (n,), reps, mode="realized", oracle=True)
            wrong = 0
            for r in recs:
                checked += 1
                if r.discarded:
                    ok = r.dijkstra_w is None and r.reason == "not_connected"
                else:
                    ok = (
                        r.dijkstra_w is not None
                        and abs(r.wn - r.dijkstra_w) <= 1e-9 * (1.0 + r.dijkstra_w)
                        and r.hn == r.dijkstra_h
                    )
                wrong += not ok
            cells[f"tau{tau:g}_n{n}_mismatch"] = wrong
            bad += wrong
    return CriterionResult(3, "realized SWG equals Dijkstra", bad == 0, {"replicates": checked, "mismatches": bad, **cells})


# -- 4: process against realized -------------------------------------------------


def criterion_modes(ctx: SuiteContext) -> CriterionResult:
    dist, n, reps = DegreeDistribution.pareto(4.0), 10_000, ctx.reps(10_000)
    proc = group_by_n(ctx.fpp("c4_process", dist, (n,), reps, mode="process"))[n]
    real = group_by_n(ctx.fpp("c4_realized", dist, (n,), reps, mode="realized"))[n]
    kh = ks_two_sample(proc["hn"], real["hn"])
    kw = ks_two_sample(proc["wn"], real["wn"])
    return CriterionResult(4, "process and realized modes agree", kh.pvalue > 1e-3 and kw.pvalue > 1e-3, {
        "replicates": reps, "hn_ks": kh.statistic, "hn_pvalue": kh.pvalue, "wn_ks": kw.statistic, "wn_pvalue": kw.pvalue,
    })


# -- 5 and 6: CLT slopes ----------------------------------------------------------


def _clt(ctx: SuiteContext, number: int, tau: float, bfs: bool) -> tuple[dict, object, object]:
    dist = DegreeDistribution.pareto(tau)
    consts = theory_constants(dist)
    reps = ctx.reps(2000)
    recs = ctx.fpp(f"c{number}_tau{tau:g}_grid", dist, CLT_GRID, reps, bfs=bfs)
    grouped = group_by_n(recs)
    rep = clt_report(grouped, consts, min_replicates=min(100, reps // 2))
    top = CLT_GRID[-1]
    m = {
        "alpha": consts.alpha,
        "mean_slope": rep.mean_fit.slope,
        "mean_slope_se": rep.mean_fit.slope_se,
        "var_slope": rep.var_fit.slope,
        "var_slope_se": rep.var_fit.slope_se,
        "ks_raw": rep.ks_standardized[top],
        "ks_lattice": rep.ks_lattice[top],
        "discarded": rep.discarded,
    }
    m["mean_rel_err"] = _rel(m["mean_slope"], consts.alpha)
    m["var_rel_err"] = _rel(m["var_slope"], consts.alpha)
    return m, grouped, consts


def criterion_clt_finite(ctx: SuiteContext) -> CriterionResult:
    m, _, _ = _clt(ctx, 5, 4.0, bfs=False)
    ok = m["mean_rel_err"] <= 0.15 and m["var_rel_err"] <= 0.25 and m["ks_lattice"] <= 0.1
    return CriterionResult(5, "hopcount CLT slopes, tau=4", ok, m)


def criterion_clt_infinite(ctx: SuiteContext) -> CriterionResult:
    m, grouped, consts = _clt(ctx, 6, 2.5, bfs=True)
    con = distance_contrast(grouped, consts)
    ratios = [con.contrast[n]["hop_ratio"] for n in CLT_GRID]
    m["hop_ratio_first"], m["hop_ratio_last"] = ratios[0], ratios[-1]
    m["hop_ratio_trend"] = con.trend
    m["hop_ratios"] = ratios
    m["bfs_scaled_last"] = con.contrast[CLT_GRID[-1]]["scaled"]
    m["bfs_reference"] = con.contrast[CLT_GRID[-1]]["reference"]
    ok = m["mean_rel_err"] <= 0.15 and m["var_rel_err"] <= 0.25 and m["ks_lattice"] <= 0.1 and con.trend == "increasing"
    return CriterionResult(6, "hopcount CLT slopes, tau=2.5, and hop/graph distance ratio", ok, m)


# -- 7, 8, 9: connection time and weight limits -------------------------------------


def _results_at(ctx: SuiteContext, tag: str, tau: float, n: int = 100_000):
    dist = DegreeDistribution.pareto(tau)
    return dist, ctx.fpp(tag, dist, (n,), ctx.reps(2000))


class _CE:
    def __init__(self, r):
        self.ce, self.discarded = r.ce_n, r.discarded


def criterion_connection(ctx: SuiteContext) -> CriterionResult:
    dist, recs = _results_at(ctx, "c7_c8_tau4_n100000", 4.0)
    st = connection_time_stats([_CE(r) for r in recs], dist, recs[0].n)
    return CriterionResult(7, "connection time CE_n/a_n is exponential", st.ks <= 0.05, {
        "kept": len(st.scaled), "ks": st.ks, "pvalue": st.pvalue, "mean": float(st.scaled.mean()), "reference_mean": st.reference_mean,
    })


def criterion_weight_finite(ctx: SuiteContext) -> CriterionResult:
    dist, recs = _results_at(ctx, "c7_c8_tau4_n100000", 4.0)
    n = recs[0].n
    w = np.array([r.wn for r in recs if not r.discarded]) - math.log(n) / (dist.nu - 1.0)
    v = LimitLawSamplers(dist).sample_V_tau_gt3(ctx.rng("V"), w.size)
    ks = ks_two_sample(w, v)
    return CriterionResult(8, "recentred weight against V, tau=4", ks.statistic <= 0.1, {
        "kept": int(w.size), "ks": ks.statistic, "pvalue": ks.pvalue, "mean_sim": float(w.mean()), "mean_limit": float(v.mean()),
    })


def criterion_weight_infinite(ctx: SuiteContext) -> CriterionResult:
    dist, recs = _results_at(ctx, "c9_tau2.5_n100000", 2.5)
    w = np.array([r.wn for r in recs if not r.discarded])
    lim = LimitLawSamplers(dist)
    rng = ctx.rng("X")
    x = lim.sample_X_many(rng, w.size) + lim.sample_X_many(rng, w.size)
    ks = ks_two_sample(w, x)
    return CriterionResult(9, "weight against X1 + X2, tau=2.5", ks.statistic <= 0.1, {
        "kept": int(w.size), "ks": ks.statistic, "pvalue": ks.pvalue, "mean_sim": float(w.mean()), "mean_limit": float(x.mean()),
    })


# -- 10: martingale limit -------------------------------------------------------------


def criterion_martingale(ctx: SuiteContext) -> CriterionResult:
    dist = DegreeDistribution.pareto(4.0)
    lim = LimitLawSamplers(dist, population_cap=10_000)
    rng = ctx.rng("W")
    k = ctx.reps(10_000)
    direct = lim.martingale_limits(rng, k)
    decomposed = lim.decomposed_W(rng, k)
    ks = ks_two_sample(direct, decomposed)
    lap = lim.laplace_check((0.5, 1.0, 2.0), rng, samples=ctx.reps(40_000), bootstrap=200)
    worst = max(r["gap"] / r["se"] for r in lap["rows"])
    m = {"samples": k, "decomp_ks": ks.statistic, "decomp_pvalue": ks.pvalue, "laplace_max_gap": lap["max_gap"], "laplace_max_gap_in_se": worst}
    for r in lap["rows"]:
        m[f"phi({r['t']:g})"] = r["phi"]
        m[f"emp({r['t']:g})"] = r["empirical"]
    return CriterionResult(10, "martingale limit decomposition and Laplace transform", ks.pvalue > 1e-3 and worst <= 3.0, m)


# -- 11: structural invariants ------------------------------------------------------------


def _normalization_errors() -> dict:
    errs = {}
    for tau in (2.2, 2.5, 2.8, 3.5, 4.0, 5.0):
        d = DegreeDistribution.pareto(tau)
        k = np.arange(2, 100_000)
        errs[f"F_tau{tau:g}"] = abs(math.fsum(d.pmf(k).tolist()) + float(d.survival(100_000)) - 1.0)
        errs[f"g_tau{tau:g}"] = abs(d.size_biased.total_mass() - 1.0)
    e = DegreeDistribution.explicit({2: 0.5, 3: 0.5})
    errs["g_explicit"] = abs(e.size_biased.total_mass() - 1.0)
    for v in ((3, 2, 0, 3), (2, 2, 2, 2, 2, 2, 2, 2), (3, 0, 0, 3, 0, 2)):
        errs[f"G_{''.join(map(str, v))}"] = abs(math.fsum(exact_generation_pmf(v, len(v)).values()) - 1.0)
    return errs


def criterion_structure(ctx: SuiteContext) -> CriterionResult:
    errs = _normalization_errors()
    norm_ok = max(errs.values()) <= 1e-12

    # exchangeable marginal of the first forward degree on a fixed sequence
    dist = DegreeDistribution.pareto(2.5)
    rng = ctx.rng("exchange")
    seq = sample_degree_sequence(1000, dist, rng).degrees
    source = int(np.argmax(seq >= 3))
    draws = ctx.reps(100_000)
    bs = np.empty(draws, dtype=np.int64)
    i = 0
    while i < draws:
        try:
            bs[i] = first_forward_degree(ProcessPairing(seq), source, rng)
            i += 1
        except Exhausted:
            continue
    expected = exchangeable_marginal(seq, source)
    chi = chi_square_gof(np.bincount(bs, minlength=len(expected))[: len(expected)], expected)

    # forward degrees approach g as n grows
    g = lump_tail(dist.size_biased.pmf(np.arange(20)), 20)
    tvs = []
    per_n = ctx.reps(50_000, floor=5000)
    for n in (1000, 10_000, 100_000):
        m = int(n**0.2)
        got: list[int] = []
        rep = 0
        while len(got) < per_n:
            r = replicate_rng(ctx.master_seed, "validate-forward", n, rep)
            rep += 1
            seq_n = sample_degree_sequence(n, dist, r).degrees
            try:
                got += forward_degrees(ProcessPairing(seq_n), int(r.integers(n)), m, r)
            except Exhausted:
                continue
        b = np.minimum(np.array(got[:per_n]), 20)
        tvs.append(tv_distance(np.bincount(b, minlength=21) / b.size, g))
    trend = classify_trend(tvs)
    ok = norm_ok and chi.pvalue > 1e-3 and trend == "decreasing"
    return CriterionResult(11, "normalizations, exchangeability and forward-degree trend", ok, {
        "max_norm_error": max(errs.values()), "exchange_chi2_pvalue": chi.pvalue, "exchange_dof": chi.dof,
        "tv_1e3": tvs[0], "tv_1e4": tvs[1], "tv_1e5": tvs[2], "tv_trend": trend,
    })


# -- 12: determinism ----------------------------------------------------------------------


def criterion_determinism(ctx: SuiteContext) -> CriterionResult:
    import tempfile

    dist = DegreeDistribution.pareto(4.0)
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for workers in (1, max(2, ctx.workers), 1):
            recs = run_fpp(dist, (500, 2000), 40, ctx.master_seed, mode="process", bfs=True, workers=workers)
            recs += run_fpp(dist, (500,), 40, ctx.master_seed, mode="realized", workers=workers)
            p = Path(tmp) / f"w{workers}_{len(blobs)}.csv"
            write_csv(recs, p)
            blobs.append(p.read_bytes())
    same = all(b == blobs[0] for b in blobs)
    return CriterionResult(12, "CSV output independent of worker count", same, {"runs": len(blobs), "bytes": len(blobs[0])})


CRITERIA: dict[int, Callable[[SuiteContext], CriterionResult]] = {
    1: criterion_tree_flow,
    2: criterion_harmonic,
    3: criterion_dijkstra,
    4: criterion_modes,
    5: criterion_clt_finite,
    6: criterion_clt_infinite,
    7: criterion_connection,
    8: criterion_weight_finite,
    9: criterion_weight_infinite,
    10: criterion_martingale,
    11: criterion_structure,
    12: criterion_determinism,
}

# wall-clock ceilings that are part of a criterion
TIME_LIMITS = {1: 120.0, 2: 60.0, 3: 300.0}


def run_criterion(number: int, ctx: SuiteContext) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number](ctx)
    except FppError as exc:
        res = CriterionResult(number, CRITERIA[number].__name__, False, {"error": f"{type(exc).__name__}: {exc}"})
    res.seconds = time.perf_counter() - t0
    limit = TIME_LIMITS.get(number)
    if limit is not None and ctx.scale >= 1.0:
        res.metrics["time_limit_s"] = limit
        if res.seconds > limit:
            res.passed = False
    return res


def run_suite(numbers, ctx: SuiteContext, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for k in sorted(numbers or CRITERIA):
        if k not in CRITERIA:
            raise KeyError(f"no criterion {k}")
        res = run_criterion(k, ctx)
        if echo:
            echo(res.line())
        out.append(res)
    return out
