"""Command line entry point: ``fppcm {gen,tree,fpp,limits,validate,report,run}``."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .config import ExperimentConfig, load_config
from .degrees import DegreeDistribution
from .errors import ConfigError
from .experiments import (
    LIMIT_COLUMNS,
    TREE_COLUMNS,
    read_csv,
    run_fpp,
    run_limits,
    run_tree,
    summarize,
    summarize_tree,
    write_csv,
    write_report,
    write_rows,
)
from .graph import build, sample_degree_sequence
from .rng import derive_seed


def _load(config: str | None, seed, workers, out) -> ExperimentConfig:
    try:
        cfg = load_config(config) if config else ExperimentConfig(dist=DegreeDistribution.pareto(4.0))
        return cfg.with_overrides(master_seed=seed, workers=workers, out=out)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


def _common(f):
    f = click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")(f)
    f = click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes.")(f)
    f = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed (u64).")(f)
    f = click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="Experiment config file.")(f)
    return f


def _echo_summary(summary: dict) -> None:
    for k, v in summary.items():
        click.echo(f"{k}={v}")


@click.group()
def main():
    """First passage percolation on configuration-model graphs."""


@main.command()
@_common
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Vertices (default: first n of the grid).")
def gen(config, seed, workers, out, n):
    """Sample one configuration-model graph and write its edge list."""
    cfg = _load(config, seed, workers, out)
    n = n or cfg.n_grid[0]
    rng = np.random.default_rng(derive_seed(cfg.master_seed, "gen", n, 0))
    seq = sample_degree_sequence(n, cfg.dist, rng)
    g = build(seq, rng)
    path = Path(cfg.out) / f"graph_n{n}.edges"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        g.write_edge_list(fh)
    click.echo(f"wrote {path} ({g.n} vertices, {g.n_edges} edges, parity fixed: {seq.parity_fixed})")


@main.command()
@_common
@click.option("--steps", type=click.IntRange(min=1), default=100, show_default=True)
def tree(config, seed, workers, out, steps):
    """Generation and time of the m-th split in the branching-process tree."""
    cfg = _load(config, seed, workers, out)
    rows = run_tree(cfg.dist, steps, cfg.replicates, cfg.master_seed, cfg.workers)
    write_rows(rows, TREE_COLUMNS, Path(cfg.out) / "tree.csv")
    summary = summarize_tree(rows, cfg.dist)
    write_report(summary, cfg.out, "tree_report")
    _echo_summary(summary)


@main.command()
@_common
def fpp(config, seed, workers, out):
    """Bilateral shortest-weight growth over the n-grid."""
    cfg = _load(config, seed, workers, out)
    modes = ("process", "realized") if cfg.mode == "both" else (cfg.mode,)
    for mode in modes:
        recs = run_fpp(cfg.dist, cfg.n_grid, cfg.replicates, cfg.master_seed, mode=mode, bfs=cfg.bfs, workers=cfg.workers, timing=cfg.timing)
        write_csv(recs, Path(cfg.out) / f"fpp_{mode}.csv")
        summary = summarize(recs)
        write_report(summary, cfg.out, f"fpp_{mode}_report")
        click.echo(f"[{mode}]")
        _echo_summary(summary)


@main.command()
@_common
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Draws per variable (default: replicates).")
def limits(config, seed, workers, out, samples):
    """Draw the limit variables W, V or X."""
    cfg = _load(config, seed, workers, out)
    rows = run_limits(cfg.dist, samples or cfg.replicates, cfg.master_seed)
    write_rows(rows, LIMIT_COLUMNS, Path(cfg.out) / "limits.csv")
    summary: dict = {}
    for var in sorted({r[1] for r in rows}):
        vals = np.array([r[2] for r in rows if r[1] == var])
        summary[f"{var}.count"] = int(vals.size)
        summary[f"{var}.mean"] = float(vals.mean())
        summary[f"{var}.std"] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    write_report(summary, cfg.out, "limits_report")
    _echo_summary(summary)


@main.command()
@_common
@click.option("--criteria", default=None, help="Comma-separated criterion numbers (default: config, else all).")
@click.option("--scale", type=float, default=None, help="Multiply replicate counts (default: config).")
def validate(config, seed, workers, out, criteria, scale):
    """Run the acceptance suite; exit status 0 iff every selected criterion passes."""
    from .acceptance import SuiteContext, run_suite

    cfg = _load(config, seed, workers, out)
    numbers = tuple(int(c) for c in criteria.split(",") if c.strip()) if criteria else cfg.criteria
    ctx = SuiteContext(cfg.master_seed, scale if scale is not None else cfg.scale, cfg.workers, Path(cfg.out))
    try:
        results = run_suite(numbers, ctx, echo=click.echo)
    except KeyError as exc:
        raise click.UsageError(str(exc)) from exc
    summary: dict = {}
    for r in results:
        summary[f"criterion{r.number}.pass"] = r.passed
        summary[f"criterion{r.number}.seconds"] = round(r.seconds, 1)
        for k, v in r.metrics.items():
            summary[f"criterion{r.number}.{k}"] = v if not isinstance(v, list) else ";".join(f"{x:.6g}" for x in v)
    write_report(summary, cfg.out, "validate_report")
    passed = sum(r.passed for r in results)
    click.echo(f"{passed}/{len(results)} criteria passed")
    sys.exit(0 if passed == len(results) else 1)


@main.command()
@_common
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
def report(config, seed, workers, out, csv_path):
    """Re-aggregate an existing replicate CSV."""
    try:
        recs = read_csv(csv_path)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    summary = summarize(recs)
    dest = Path(out) if out else Path(csv_path).parent
    write_report(summary, dest, Path(csv_path).stem + "_report")
    _echo_summary(summary)


@main.command()
@_common
@click.pass_context
def run(ctx, config, seed, workers, out):
    """Dispatch on the ``suite`` key of the config."""
    cfg = _load(config, seed, workers, out)
    target = {"fpp": fpp, "tree": tree, "limits": limits, "validate-all": validate}[cfg.suite]
    ctx.invoke(target, config=config, seed=seed, workers=workers, out=out)


if __name__ == "__main__":
    main()
