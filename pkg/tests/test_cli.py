import csv

import pytest
from click.testing import CliRunner

from fppcm.cli import main
from fppcm.config import config_from_text, parse_pmf
from fppcm.degrees import DegreeDistribution
from fppcm.errors import ConfigError
from fppcm.experiments import CSV_COLUMNS, csv_schema, fpp_replicate, dist_key, read_csv, run_fpp, write_csv

CONFIG = """
[experiment]
dist_kind = pareto
dist_tau = 4
n_grid = 300, 600
replicates = 12
master_seed = 99
mode = process
bfs = true
"""


def test_schema():
    assert ",".join(csv_schema()) == "n,dist,rep,seed,a_n,ce_n,h1,h2,hn,wn,bfs_dist,r_overshoot,discarded,reason,ms"


def test_config_parsing():
    cfg = config_from_text(CONFIG)
    assert cfg.n_grid == (300, 600) and cfg.replicates == 12 and cfg.bfs
    assert cfg.dist == DegreeDistribution.pareto(4.0)
    assert parse_pmf("2:0.5, 3:0.5") == {2: 0.5, 3: 0.5}
    e = config_from_text("[experiment]\ndist_kind = explicit\ndist_pmf = 2:0.25, 4:0.75\n")
    assert e.dist.support == (2, 4)


@pytest.mark.parametrize(
    "bad",
    [
        CONFIG.replace("replicates = 12", "replicates = 0"),
        CONFIG.replace("300, 600", "600, 300"),
        CONFIG.replace("mode = process", "mode = fast"),
        CONFIG + "colour = blue\n",
        "[other]\nx = 1\n",
        CONFIG.replace("dist_tau = 4", "dist_tau = 1.5"),
    ],
)
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        config_from_text(bad)


def test_record_invariants(tmp_path):
    recs = run_fpp(DegreeDistribution.pareto(2.5), (300,), 40, 3, bfs=True)
    assert [r.rep for r in recs] == list(range(40))
    for r in recs:
        if r.discarded:
            assert r.hn is None and r.wn is None and r.reason
        else:
            assert r.hn == r.h1 + r.h2 and r.wn > 0
    p = tmp_path / "x.csv"
    write_csv(recs, p)
    back = read_csv(p)
    assert [b.wn for b in back] == [r.wn for r in recs]
    assert [b.hn for b in back] == [r.hn for r in recs]


def test_discarded_row_format(tmp_path):
    rec = fpp_replicate(dist_key(DegreeDistribution.pareto(4.0)), 50, 0, 1)
    rec.discarded, rec.reason, rec.hn, rec.wn = True, "not_connected", None, None
    p = tmp_path / "d.csv"
    write_csv([rec], p)
    row = next(csv.DictReader(open(p)))
    assert row["hn"] == "" and row["wn"] == "" and row["reason"] == "not_connected" and row["discarded"] == "1"


def test_replicate_is_replayable():
    key = dist_key(DegreeDistribution.pareto(4.0))
    a = fpp_replicate(key, 400, 7, 5)
    b = fpp_replicate(key, 400, 7, 5)
    assert a == b
    assert fpp_replicate(key, 400, 8, 5).seed != a.seed


def test_fpp_deterministic_across_workers(tmp_path):
    (tmp_path / "c.ini").write_text(CONFIG)
    runner = CliRunner()
    outs = []
    for w in (1, 2):
        out = tmp_path / f"w{w}"
        res = runner.invoke(main, ["fpp", "--config", str(tmp_path / "c.ini"), "--workers", str(w), "--out", str(out)])
        assert res.exit_code == 0, res.output
        outs.append((out / "fpp_process.csv").read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.reader(outs[0].decode().splitlines()))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 1 + 24


def test_other_subcommands(tmp_path):
    (tmp_path / "c.ini").write_text(CONFIG)
    runner = CliRunner()
    base = ["--config", str(tmp_path / "c.ini"), "--out", str(tmp_path / "o")]
    for cmd in (["gen", "--n", "100"], ["tree", "--steps", "20"], ["limits", "--samples", "10"], ["fpp"]):
        res = runner.invoke(main, cmd + base)
        assert res.exit_code == 0, res.output
    res = runner.invoke(main, ["report", str(tmp_path / "o" / "fpp_process.csv")])
    assert res.exit_code == 0 and "pareto:4.n300.kept" in res.output
    edges = (tmp_path / "o" / "graph_n100.edges").read_text().split("\n")[0].split()
    assert len(edges) == 3
    assert (tmp_path / "o" / "fpp_process_report.kv").exists()


def test_bad_config_exit_code(tmp_path):
    (tmp_path / "c.ini").write_text(CONFIG.replace("replicates = 12", "replicates = 0"))
    res = CliRunner().invoke(main, ["fpp", "--config", str(tmp_path / "c.ini")])
    assert res.exit_code == 2


def test_validate_exit_status(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["validate", "--criteria", "2,12", "--scale", "0.2", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    assert "criterion  2 PASS" in res.output and "2/2 criteria passed" in res.output
    assert (tmp_path / "validate_report.kv").read_text().count(".pass=1") == 2


def test_run_dispatches_on_suite(tmp_path):
    (tmp_path / "c.ini").write_text(CONFIG + "suite = tree\nout = " + str(tmp_path / "t") + "\n")
    res = CliRunner().invoke(main, ["run", "--config", str(tmp_path / "c.ini")])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "t" / "tree.csv").exists()
