import math

import numpy as np
import pytest

from fppcm.degrees import DegreeDistribution
from fppcm.errors import CriticalTau, EmptyInput, InsufficientData
from fppcm.stats import (
    TheoryConstants,
    a_n,
    chi_square_gof,
    classify_trend,
    clt_report,
    distance_contrast,
    ks_one_sample,
    ks_two_sample,
    lattice_ks,
    lump_tail,
    pooled_chi_square,
    theory_constants,
    tv_distance,
    weighted_line,
)


@pytest.mark.parametrize("tau", [2.2, 2.5, 2.8, 3.5, 4.0, 5.0])
def test_constants_branches(tau):
    d = DegreeDistribution.pareto(tau)
    c = theory_constants(d)
    if tau > 3:
        nu = d.nu
        assert (c.alpha, c.beta, c.gamma, c.a_n_exponent) == pytest.approx((nu / (nu - 1), nu / (nu - 1), 1 / (nu - 1), 0.5))
    else:
        assert (c.alpha, c.beta, c.gamma) == pytest.approx((2 * (tau - 2) / (tau - 1), 1.0, 0.0))
        assert c.a_n_exponent == pytest.approx((tau - 2) / (tau - 1))


def test_constants_examples():
    c = theory_constants(DegreeDistribution.pareto(2.5))
    assert c.alpha == pytest.approx(2 / 3) and c.a_n_exponent == pytest.approx(1 / 3)
    assert theory_constants(DegreeDistribution.explicit({2: 0.5, 3: 0.5})).alpha == pytest.approx(8 / 3)
    with pytest.raises(CriticalTau):
        theory_constants(DegreeDistribution.pareto(3.0))


def test_a_n_examples():
    assert a_n(DegreeDistribution.pareto(4.0), 10**6) == 1000
    assert a_n(DegreeDistribution.pareto(2.5), 10**6) == 100
    assert a_n(DegreeDistribution.pareto(4.0), 2) >= 1
    with pytest.raises(ValueError):
        a_n(DegreeDistribution.pareto(4.0), 1)


def test_ks_and_tv_basics():
    x = np.random.default_rng(0).random(500)
    assert ks_two_sample(x, x).statistic == 0
    assert tv_distance([0.2, 0.8], [0.2, 0.8]) == 0
    assert tv_distance({1: 1.0}, {2: 1.0}) == 1
    assert tv_distance(np.array([1.0]), np.array([0.0, 1.0])) == 1
    with pytest.raises(EmptyInput):
        ks_one_sample([], lambda t: t)
    with pytest.raises(EmptyInput):
        tv_distance({}, {1: 1.0})


def test_uniform_ks_critical_value():
    u = np.random.default_rng(1).random(10**5)
    assert ks_one_sample(u, lambda t: np.clip(t, 0, 1)).statistic <= 1.63 / math.sqrt(1e5)


def test_chi_square_merges_and_pools():
    r = chi_square_gof([50, 30, 15, 4, 1], [0.5, 0.3, 0.15, 0.04, 0.01])
    assert r.dof < 4 and r.pvalue > 0.99
    p = pooled_chi_square([r, r])
    assert p.dof == 2 * r.dof and p.statistic == pytest.approx(2 * r.statistic)


def test_lump_tail():
    out = lump_tail(np.array([0.5, 0.25, 0.125, 0.125]), 2)
    assert out.tolist() == [0.5, 0.25, 0.25]


def test_planted_slope_recovered():
    rng = np.random.default_rng(2)
    x = np.log(2.0 ** np.arange(10, 18))
    se = np.full(x.size, 0.05)
    y = 1.7 * x + 0.4 + rng.normal(0, 0.05, x.size)
    fit = weighted_line(x, y, se)
    assert abs(fit.slope - 1.7) <= 2 * fit.slope_se


def test_clt_constant_records():
    c = TheoryConstants(2.0, 2.0, 0.5, 0.5, 3.0, 2.0, 4.0)
    ns = [2**k for k in range(10, 18)]
    recs = {n: {"hn": [round(c.alpha * math.log(n))] * 120, "wn": [1.0] * 120} for n in ns}
    rep = clt_report(recs, c)
    assert rep.mean_fit.slope == pytest.approx(c.alpha, rel=0.05)
    assert abs(rep.var_fit.slope) < 1e-12
    with pytest.raises(InsufficientData):
        clt_report({1024: recs[1024]}, c)
    with pytest.raises(InsufficientData):
        clt_report({n: {"hn": [1] * 10} for n in ns}, c)


def test_clt_gaussian_records():
    rng = np.random.default_rng(3)
    c = TheoryConstants(1.5, 1.5, 0.5, 0.5, 3.0, 3.0, 4.0)
    recs = {}
    for k in range(10, 18):
        ln = math.log(2**k)
        recs[2**k] = {"hn": np.rint(rng.normal(c.alpha * ln, math.sqrt(c.alpha * ln), 3000)).astype(int)}
    rep = clt_report(recs, c)
    assert abs(rep.mean_fit.slope - c.alpha) <= 3 * rep.mean_fit.slope_se
    top = 2**17
    assert rep.ks_lattice[top] < 0.04
    assert rep.ks_lattice[top] < rep.ks_standardized[top]


def test_lattice_ks_on_discretized_normal():
    rng = np.random.default_rng(4)
    v = np.floor(rng.normal(10, 2, 20000) + 0.5).astype(int)
    assert lattice_ks(v, 10, 2) < 0.02


def test_distance_contrast():
    c25 = theory_constants(DegreeDistribution.pareto(2.5))
    recs = {n: {"hn": [6] * 5, "bfs": [3] * 5} for n in (1000, 10000)}
    out = distance_contrast(recs, c25)
    assert out.trend == "flat"
    assert out.contrast[1000]["reference"] == pytest.approx(2 / math.log(2))
    c4 = theory_constants(DegreeDistribution.pareto(4.0))
    out4 = distance_contrast(recs, c4)
    assert out4.contrast[1000]["reference"] == pytest.approx(1 / math.log(DegreeDistribution.pareto(4.0).nu))
    with pytest.raises(InsufficientData):
        distance_contrast({1000: {"hn": [1]}}, c4)


def test_classify_trend():
    assert classify_trend([1, 2, 3]) == "increasing"
    assert classify_trend([3, 2, 1]) == "decreasing"
    assert classify_trend([1, 3, 2]) == "mixed"
    assert classify_trend([2, 2]) == "flat"
