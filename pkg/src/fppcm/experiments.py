"""Replicate pipelines, CSV records and the worker pool."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .degrees import DegreeDistribution
from .errors import FppError
from .graph import build, sample_degree_sequence
from .oracle import assign_weights, shortest_path
from .rng import derive_seed
from .stats import a_n as a_n_of
from .swg import ProcessPairing, bilateral_with_bfs, grow_bilateral

CSV_COLUMNS = (
    "n", "dist", "rep", "seed", "a_n", "ce_n", "h1", "h2", "hn", "wn",
    "bfs_dist", "r_overshoot", "discarded", "reason", "ms",
)


def csv_schema() -> list[str]:
    return list(CSV_COLUMNS)


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


@dataclass
class ReplicateRecord:
    n: int
    dist: str
    rep: int
    seed: int
    a_n: int
    ce_n: int | None = None
    h1: int | None = None
    h2: int | None = None
    hn: int | None = None
    wn: float | None = None
    bfs_dist: int | None = None
    r_overshoot: int | None = None
    discarded: bool = False
    reason: str = ""
    ms: float | None = None
    dijkstra_w: float | None = None
    dijkstra_h: int | None = None

    def row(self) -> list[str]:
        return [fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _opt(cast, text: str):
    return None if text == "" else cast(text)


def record_from_row(row: dict) -> ReplicateRecord:
    return ReplicateRecord(
        n=int(row["n"]),
        dist=row["dist"],
        rep=int(row["rep"]),
        seed=int(row["seed"]),
        a_n=int(row["a_n"]),
        ce_n=_opt(int, row["ce_n"]),
        h1=_opt(int, row["h1"]),
        h2=_opt(int, row["h2"]),
        hn=_opt(int, row["hn"]),
        wn=_opt(float, row["wn"]),
        bfs_dist=_opt(int, row["bfs_dist"]),
        r_overshoot=_opt(int, row["r_overshoot"]),
        discarded=row["discarded"] == "1",
        reason=row["reason"],
        ms=_opt(float, row["ms"]),
    )


def write_csv(records: Iterable[ReplicateRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    path.write_text(buf.getvalue())


def read_csv(path) -> list[ReplicateRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [record_from_row(r) for r in reader]


# -- distributions in worker processes ----------------------------------------


def dist_key(dist: DegreeDistribution) -> tuple:
    if dist.kind == "pareto":
        return ("pareto", dist.tau)
    return ("explicit", tuple(zip(dist.support, dist.probs)))


@lru_cache(maxsize=8)
def dist_from_key(key: tuple) -> DegreeDistribution:
    if key[0] == "pareto":
        return DegreeDistribution.pareto(key[1])
    return DegreeDistribution.explicit(dict(key[1]))


# -- one replicate --------------------------------------------------------------


def fpp_replicate(
    key: tuple,
    n: int,
    rep: int,
    master_seed: int,
    mode: str = "process",
    bfs: bool = False,
    timing: bool = False,
    oracle: bool = False,
) -> ReplicateRecord:
    """One bilateral run on a fresh graph; errors become discarded rows."""
    dist = dist_from_key(key)
    seed = derive_seed(master_seed, f"fpp-{mode}", n, rep)
    an = a_n_of(dist, n)
    rec = ReplicateRecord(n, dist.label, rep, seed, an)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    try:
        seq = sample_degree_sequence(n, dist, rng)
        src1, src2 = (int(v) for v in rng.choice(n, 2, replace=False))
        if mode == "process":
            ctx = ProcessPairing(seq.degrees)
        elif mode == "realized":
            ctx = assign_weights(build(seq, rng), rng)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        res = bilateral_with_bfs(ctx, src1, src2, an, rng) if bfs else grow_bilateral(ctx, src1, src2, an, rng)
        rec.r_overshoot = res.r_overshoot
        if res.discarded:
            rec.discarded, rec.reason = True, res.reason
        else:
            rec.ce_n, rec.h1, rec.h2, rec.hn, rec.wn = res.ce, res.h1, res.h2, res.hn, res.wn
        rec.bfs_dist = res.bfs_dist
        if oracle and mode == "realized":
            sp = shortest_path(ctx, src1, src2)
            if sp is not None:
                rec.dijkstra_w, rec.dijkstra_h = sp
    except (FppError, ValueError) as exc:
        rec.discarded, rec.reason = True, f"error:{type(exc).__name__}"
    if timing:
        rec.ms = round((time.perf_counter() - t0) * 1000.0, 3)
    return rec


def _run_chunk(fn: Callable, items: Sequence) -> list:
    return [fn(*it) for it in items]


def map_ordered(fn: Callable, items: Sequence[tuple], workers: int = 1, chunk: int = 64) -> list:
    """``[fn(*it) for it in items]``, optionally over a process pool; order preserved."""
    items = list(items)
    if workers <= 1 or len(items) <= chunk:
        return _run_chunk(fn, items)
    chunks = [items[i : i + chunk] for i in range(0, len(items), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(partial(_run_chunk, fn), chunks)
        return [r for part in parts for r in part]


def run_fpp(
    dist: DegreeDistribution,
    n_grid: Sequence[int],
    replicates: int,
    master_seed: int,
    mode: str = "process",
    bfs: bool = False,
    workers: int = 1,
    timing: bool = False,
    oracle: bool = False,
) -> list[ReplicateRecord]:
    """Replicates over the grid, sorted by ``(n, rep)`` whatever the worker count."""
    fn = partial(fpp_replicate, dist_key(dist), mode=mode, bfs=bfs, timing=timing, oracle=oracle)
    items = [(n, r, master_seed) for n in n_grid for r in range(replicates)]
    return map_ordered(fn, items, workers)


def group_by_n(records: Iterable[ReplicateRecord]) -> dict[int, dict]:
    """Per-``n`` arrays of kept values plus discard counts, for the stats layer."""
    out: dict[int, dict] = {}
    for r in records:
        d = out.setdefault(r.n, {"hn": [], "wn": [], "ce": [], "a_n": r.a_n, "bfs": [], "discarded": 0})
        if r.discarded:
            d["discarded"] += 1
            continue
        d["hn"].append(r.hn)
        d["wn"].append(r.wn)
        d["ce"].append(r.ce_n)
        if r.bfs_dist is not None:
            d["bfs"].append(r.bfs_dist)
    return out


# -- reports ---------------------------------------------------------------------


def dist_from_label(label: str) -> DegreeDistribution:
    """Inverse of :attr:`DegreeDistribution.label`."""
    kind, _, rest = label.partition(":")
    if kind == "pareto":
        return DegreeDistribution.pareto(float(rest))
    if kind == "explicit":
        pmf = {}
        for part in rest.split(";"):
            k, p = part.split("=")
            pmf[int(k)] = float(p)
        return DegreeDistribution.explicit(pmf)
    raise ValueError(f"unknown distribution label {label!r}")


def summarize(records: Sequence[ReplicateRecord]) -> dict[str, object]:
    """Flat ``key -> value`` summary, grouped by distribution and ``n``."""
    from .errors import FppError as _E
    from .stats import clt_report, distance_contrast, theory_constants

    out: dict[str, object] = {"replicates": len(records)}
    by_dist: dict[str, list[ReplicateRecord]] = {}
    for r in records:
        by_dist.setdefault(r.dist, []).append(r)
    for label, recs in by_dist.items():
        p = label
        grouped = group_by_n(recs)
        for n, d in sorted(grouped.items()):
            q = f"{p}.n{n}"
            out[f"{q}.kept"] = len(d["hn"])
            out[f"{q}.discarded"] = d["discarded"]
            out[f"{q}.a_n"] = d["a_n"]
            if d["hn"]:
                h = np.asarray(d["hn"], dtype=float)
                w = np.asarray(d["wn"], dtype=float)
                out[f"{q}.hn_mean"] = float(h.mean())
                out[f"{q}.hn_var"] = float(h.var(ddof=1)) if h.size > 1 else 0.0
                out[f"{q}.wn_mean"] = float(w.mean())
                out[f"{q}.ce_over_a_n_mean"] = float(np.mean(d["ce"]) / d["a_n"])
            if d["bfs"]:
                out[f"{q}.bfs_mean"] = float(np.mean(d["bfs"]))
        try:
            consts = theory_constants(dist_from_label(label))
        except (_E, ValueError):
            continue
        out[f"{p}.alpha"] = consts.alpha
        out[f"{p}.gamma"] = consts.gamma
        if len(grouped) >= 2:
            try:
                rep = clt_report(grouped, consts, min_replicates=2)
            except _E as exc:
                out[f"{p}.clt_error"] = str(exc)
            else:
                top = max(grouped)
                out[f"{p}.mean_slope"] = rep.mean_fit.slope
                out[f"{p}.mean_slope_se"] = rep.mean_fit.slope_se
                out[f"{p}.var_slope"] = rep.var_fit.slope
                out[f"{p}.var_slope_se"] = rep.var_fit.slope_se
                out[f"{p}.ks_standardized_top"] = rep.ks_standardized[top]
                out[f"{p}.ks_lattice_top"] = rep.ks_lattice[top]
        if all(d["bfs"] and d["hn"] for d in grouped.values()):
            con = distance_contrast(grouped, consts)
            out[f"{p}.hop_ratio_trend"] = con.trend
            for n, row in con.contrast.items():
                out[f"{p}.n{n}.hop_ratio"] = row["hop_ratio"]
                out[f"{p}.n{n}.bfs_scaled"] = row["scaled"]
            out[f"{p}.bfs_reference"] = next(iter(con.contrast.values()))["reference"]
    return out


def write_report(summary: dict, directory, stem: str = "report") -> tuple[Path, Path]:
    """Plain text table plus a ``key=value`` file with the same content."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max((len(k) for k in summary), default=0)
    lines = [f"{k.ljust(width)}  {fmt(v)}" for k, v in summary.items()]
    txt = directory / f"{stem}.txt"
    kv = directory / f"{stem}.kv"
    txt.write_text("\n".join(lines) + "\n")
    kv.write_text("".join(f"{k}={fmt(v)}\n" for k, v in summary.items()))
    return txt, kv


# -- tree and limit-law suites ------------------------------------------------------

TREE_COLUMNS = ("rep", "seed", "m", "g_m", "ghat_m", "t_m", "s_m", "discarded", "reason")


def tree_replicate(key: tuple, m: int, rep: int, master_seed: int) -> list:
    """``(G_m, G-hat_m, T_m)`` for a root ``D ~ F`` followed by ``B_2..B_m ~ g``."""
    from .errors import DeadProcess
    from .tree import coupled_generations, s_values

    dist = dist_from_key(key)
    seed = derive_seed(master_seed, "tree", m, rep)
    rng = np.random.default_rng(seed)
    d = np.concatenate([[dist.sample(rng)], dist.size_biased.sample(rng, m - 1)]).astype(np.int64)
    try:
        g, gh = coupled_generations(d, rng, 1)
    except DeadProcess:
        return [rep, seed, m, None, None, None, None, True, "dead_process"]
    s = s_values(d).astype(float)
    t = float(np.sum(-np.log1p(-rng.random(m)) / s))
    return [rep, seed, m, int(g[0]), int(gh[0]), t, int(s[-1]), False, ""]


def run_tree(dist: DegreeDistribution, m: int, replicates: int, master_seed: int, workers: int = 1) -> list[list]:
    fn = partial(tree_replicate, dist_key(dist))
    return map_ordered(fn, [(m, r, master_seed) for r in range(replicates)], workers)


def summarize_tree(rows: Sequence[list], dist: DegreeDistribution) -> dict:
    from .tree import harmonic_number

    kept = [r for r in rows if not r[7]]
    m = rows[0][2]
    out: dict[str, object] = {"m": m, "replicates": len(rows), "kept": len(kept), "harmonic_m": harmonic_number(m)}
    if kept:
        g = np.array([r[3] for r in kept], dtype=float)
        gh = np.array([r[4] for r in kept], dtype=float)
        t = np.array([r[5] for r in kept], dtype=float)
        out.update(g_mean=float(g.mean()), g_var=float(g.var()), ghat_mean=float(gh.mean()), t_mean=float(t.mean()))
        out["ghat_le_g"] = bool(np.all(gh <= g))
    nu = dist.nu
    if math.isfinite(nu) and nu > 1:
        out["g_mean_reference"] = nu / (nu - 1.0) * math.log(m)
    return out


LIMIT_COLUMNS = ("rep", "variable", "value")


def run_limits(dist: DegreeDistribution, samples: int, master_seed: int, population_cap: int = 100_000) -> list[tuple]:
    """Draws of ``W`` (finite ``nu``) and of ``V`` or ``X`` depending on the regime."""
    from .limits import LimitLawSamplers

    lim = LimitLawSamplers(dist, population_cap=population_cap)
    rng = np.random.default_rng(derive_seed(master_seed, "limits", 0, 0))
    rows: list[tuple] = []
    tau = dist.tau_effective
    if math.isfinite(dist.nu) and dist.nu > 1:
        rows += [(i, "W", float(w)) for i, w in enumerate(lim.martingale_limits(rng, samples))]
        if tau > 3:
            rows += [(i, "V", float(v)) for i, v in enumerate(lim.sample_V_tau_gt3(rng, samples))]
    if 2 < tau < 3:
        rows += [(i, "X", float(x)) for i, x in enumerate(lim.sample_X_many(rng, samples))]
    return rows


def write_rows(rows: Iterable[Sequence], columns: Sequence[str], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    path.write_text(buf.getvalue())
