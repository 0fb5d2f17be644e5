"""Experiment configuration: one ``[experiment]`` section of ``key = value`` lines.

Example::

    [experiment]
    dist_kind = pareto
    dist_tau = 4
    # dist_kind = explicit
    # dist_pmf = 2:0.5, 3:0.5
    n_grid = 1000, 10000
    replicates = 200
    master_seed = 12345
    mode = process          # process | realized | both
    suite = fpp             # fpp | tree | limits | validate-all
    out = results
    bfs = true
    timing = false
    workers = 1
    criteria = 1, 2, 3      # validate only; empty means all
    scale = 1.0             # validate only; multiplies replicate counts
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .degrees import DegreeDistribution
from .errors import ConfigError

MODES = ("process", "realized", "both")
SUITES = ("fpp", "tree", "limits", "validate-all")


@dataclass(frozen=True)
class ExperimentConfig:
    dist: DegreeDistribution
    n_grid: tuple[int, ...] = (1000,)
    replicates: int = 100
    master_seed: int = 1
    mode: str = "process"
    suite: str = "fpp"
    out: Path = Path("results")
    bfs: bool = False
    timing: bool = False
    workers: int = 1
    criteria: tuple[int, ...] = field(default_factory=tuple)
    scale: float = 1.0

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if not self.n_grid or any(n < 2 for n in self.n_grid):
            raise ConfigError("n_grid needs integers >= 2")
        if list(self.n_grid) != sorted(self.n_grid):
            raise ConfigError("n_grid must be sorted ascending")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.suite not in SUITES:
            raise ConfigError(f"suite must be one of {SUITES}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must fit in 64 unsigned bits")
        if self.scale <= 0:
            raise ConfigError("scale must be positive")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "out" in kw:
            kw["out"] = Path(kw["out"])
        return replace(self, **kw)


def _ints(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.replace(";", ",").split(",") if p.strip()]
    try:
        return tuple(int(float(p)) if "e" in p.lower() else int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def parse_pmf(text: str) -> dict[int, float]:
    """``"2:0.5, 3:0.5"`` to ``{2: 0.5, 3: 0.5}``."""
    pmf = {}
    for part in text.split(","):
        if not part.strip():
            continue
        try:
            k, p = part.split(":")
            pmf[int(k)] = float(p)
        except ValueError as exc:
            raise ConfigError(f"bad pmf entry {part!r}") from exc
    return pmf


def _dist(sec) -> DegreeDistribution:
    kind = sec.get("dist_kind", "pareto").strip().lower()
    try:
        if kind == "pareto":
            return DegreeDistribution.pareto(sec.getfloat("dist_tau", 4.0))
        if kind == "explicit":
            return DegreeDistribution.explicit(parse_pmf(sec.get("dist_pmf", "")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown dist_kind {kind!r}")


def config_from_text(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if "experiment" not in cp:
        raise ConfigError("missing [experiment] section")
    sec = cp["experiment"]
    known = {
        "dist_kind", "dist_tau", "dist_pmf", "n_grid", "replicates", "master_seed", "mode",
        "suite", "out", "bfs", "timing", "workers", "criteria", "scale",
    }
    unknown = set(sec) - known
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        return ExperimentConfig(
            dist=_dist(sec),
            n_grid=_ints(sec.get("n_grid", "1000")),
            replicates=sec.getint("replicates", 100),
            master_seed=sec.getint("master_seed", 1),
            mode=sec.get("mode", "process").strip(),
            suite=sec.get("suite", "fpp").strip(),
            out=Path(sec.get("out", "results").strip()),
            bfs=sec.getboolean("bfs", False),
            timing=sec.getboolean("timing", False),
            workers=sec.getint("workers", 1),
            criteria=_ints(sec.get("criteria", "")),
            scale=sec.getfloat("scale", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_text(text)
