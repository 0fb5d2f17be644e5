import math

import numpy as np
import pytest

from fppcm.degrees import DegreeDistribution
from fppcm.errors import FiniteNuMisuse, InfiniteNu
from fppcm.limits import LimitLawSamplers


@pytest.fixture(scope="module")
def two_point():
    return LimitLawSamplers(DegreeDistribution.explicit({2: 0.5, 3: 0.5}), population_cap=10_000)


def test_cap_floor():
    with pytest.raises(ValueError):
        LimitLawSamplers(DegreeDistribution.pareto(4.0), population_cap=999)


def test_degenerate_nu_rejected():
    lim = LimitLawSamplers(DegreeDistribution.explicit({2: 1.0}))
    with pytest.raises(InfiniteNu):
        lim.sample_W(np.random.default_rng(0))


def test_infinite_nu_rejected():
    lim = LimitLawSamplers(DegreeDistribution.pareto(2.5))
    with pytest.raises(InfiniteNu):
        lim.martingale_limits(np.random.default_rng(0), 3)


def test_extinction_gives_zero():
    # forward degree 0 has mass 1/4, so small trees die out
    lim = LimitLawSamplers(DegreeDistribution.explicit({1: 0.5, 3: 0.5}, test_mode=True), population_cap=1000)
    w = lim.martingale_limits(np.random.default_rng(1), 2000, root="one")
    assert (w == 0).any() and (w > 0).any() and (w >= 0).all()


def test_martingale_mean(two_point):
    # E[W] for one initial individual is 1
    w = two_point.martingale_limits(np.random.default_rng(2), 20_000, root="one")
    assert abs(w.mean() - 1.0) <= 3 * w.std() / math.sqrt(w.size)


def test_compose_v_fixed_inputs():
    lim = LimitLawSamplers(DegreeDistribution.pareto(4.0))
    mu, nu1 = lim.mu, lim.nu - 1
    v = lim.compose_V(np.array([nu1]), np.array([nu1]), np.array([mu / nu1]))[0]
    assert v == pytest.approx(math.log(mu * nu1) / nu1 - 2 * math.log(nu1) / nu1)


def test_compose_v_scaling():
    lim = LimitLawSamplers(DegreeDistribution.pareto(4.0))
    rng = np.random.default_rng(3)
    w1, w2, m = rng.random(50) + 0.1, rng.random(50) + 0.1, rng.random(50) + 0.1
    c = 3.7
    diff = lim.compose_V(w1, w2, m) - lim.compose_V(c * w1, c * w2, m)
    assert np.allclose(diff, 2 * math.log(c) / (lim.nu - 1))


def test_lambda_is_log_exponential():
    from fppcm.stats import ks_one_sample

    lim = LimitLawSamplers(DegreeDistribution.pareto(4.0))
    lam = lim.sample_Lambda(np.random.default_rng(4), 20_000)
    # exp(Lambda) is Exp(1), so -Lambda is standard Gumbel
    assert ks_one_sample(-lam, lambda x: np.exp(-np.exp(-x))).pvalue > 1e-3


def test_x_requires_infinite_variance():
    with pytest.raises(FiniteNuMisuse):
        LimitLawSamplers(DegreeDistribution.pareto(4.0)).sample_X(np.random.default_rng(0))


def test_x_sample_fields():
    lim = LimitLawSamplers(DegreeDistribution.pareto(2.5))
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = lim.sample_X(rng)
        assert x.value > 0 and x.terms >= lim.x_run and 0 < x.tail_bound < 1e-3


def test_x_increment_decay():
    # E[1/S_i] ~ i^(-1/(tau-2)) = i^-2 at tau = 2.5
    d = DegreeDistribution.pareto(2.5)
    rng = np.random.default_rng(6)
    runs, top = 10_000, 256
    b = d.size_biased.sample(rng, (runs, top - 1)) - 1
    s = d.sample(rng, runs)[:, None] + np.concatenate([np.zeros((runs, 1)), np.cumsum(b, axis=1)], axis=1)
    i = np.array([16, 32, 64, 128, 256])
    means = (1.0 / s).mean(axis=0)[i - 1]
    slope = np.polyfit(np.log(i), np.log(means), 1)[0]
    assert -2.4 <= slope <= -1.6
    assert np.all(means[:-1] / means[1:] > 2.5)


def test_phi_two_point_closed_form(two_point):
    # this law has phi(t) = 1/(1+t)
    for t in (0.25, 1.0, 3.0):
        assert two_point.phi(t) == pytest.approx(1 / (1 + t), abs=1e-6)
    assert two_point.phi(1e-9) == pytest.approx(1.0, abs=1e-8)


def test_phi_decreasing():
    lim = LimitLawSamplers(DegreeDistribution.pareto(4.0))
    vals = [lim.phi(t) for t in (0.1, 0.5, 1.0, 2.0, 5.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_laplace_check_two_point(two_point):
    out = two_point.laplace_check([1.0], np.random.default_rng(7), samples=20_000, bootstrap=100)
    row = out["rows"][0]
    assert row["gap"] <= 3 * row["se"]
    assert out["max_gap"] == row["gap"]


def test_decomposed_w_mean():
    lim = LimitLawSamplers(DegreeDistribution.pareto(4.0), population_cap=2000)
    rng = np.random.default_rng(8)
    a = lim.martingale_limits(rng, 4000)
    b = lim.decomposed_W(rng, 4000)
    # both have mean E[D] = mu
    for w in (a, b):
        assert abs(w.mean() - lim.mu) <= 4 * w.std() / math.sqrt(w.size)
