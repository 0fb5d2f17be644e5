import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppcm.degrees import DegreeDistribution, moments, sample_degree, sample_size_biased


class FixedU:
    """Stand-in generator whose ``random`` returns a fixed value."""

    def __init__(self, value):
        self.value = value

    def random(self, size=None):
        return self.value if size is None else np.full(size, self.value)


def test_two_point_moments():
    mu, nu = moments(DegreeDistribution.explicit({2: 0.5, 3: 0.5}))
    assert mu == pytest.approx(2.5)
    assert nu == pytest.approx(1.6)


def test_point_mass_moments_warn():
    d = DegreeDistribution.explicit({2: 1.0})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mu, nu = moments(d)
    assert (mu, nu) == (2.0, 1.0)
    assert caught


def test_pareto_moments_against_partial_sums():
    d = DegreeDistribution.pareto(4.0)
    k = np.arange(2, 10**7 + 1, dtype=float)
    f = d.pmf(k)
    surv = float(d.survival(10**7 + 1))
    # remaining mass of k f_k beyond K: K P(D > K) + sum_{k > K+1} P(D >= k), tiny at tau = 4
    mu_direct = math.fsum((k * f).tolist())
    assert abs(d.mu - mu_direct) <= 1e-6
    second_direct = math.fsum((k * (k - 1) * f).tolist())
    assert d.second_factorial_moment == pytest.approx(second_direct, rel=1e-5)
    assert surv < 1e-20


def test_nu_infinite_below_three():
    assert math.isinf(DegreeDistribution.pareto(2.5).nu)
    assert math.isinf(DegreeDistribution.pareto(3.0).nu)
    assert math.isfinite(DegreeDistribution.pareto(3.5).nu)


def test_inverse_cdf_closed_form():
    d = DegreeDistribution.pareto(3.0)
    assert sample_degree(d, FixedU(0.75)) == 4  # U = 0.25 after reflection
    assert sample_degree(d, FixedU(0.0)) == 2  # U -> 1


def test_survival_at_four():
    d = DegreeDistribution.pareto(3.0)
    x = d.sample(np.random.default_rng(1), 10**6)
    frac = float((x >= 4).mean())
    assert abs(frac - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 1e6)


@pytest.mark.parametrize("tau", [2.2, 2.5, 3.5, 4.0, 6.0])
def test_pmf_normalization(tau):
    d = DegreeDistribution.pareto(tau)
    k = np.arange(2, 10**5)
    assert abs(math.fsum(d.pmf(k).tolist()) + float(d.survival(10**5)) - 1.0) <= 1e-12
    assert abs(d.size_biased.total_mass() - 1.0) <= 1e-12


def test_size_biased_two_point():
    sb = DegreeDistribution.explicit({2: 0.5, 3: 0.5}).size_biased
    assert sb.pmf(np.array([0, 1, 2])).tolist() == pytest.approx([0.0, 0.4, 0.6])
    x = sb.sample(np.random.default_rng(2), 10**5)
    assert set(np.unique(x)) == {1, 2}
    assert abs((x == 1).mean() - 0.4) < 0.006


def test_size_biased_point_mass():
    sb = DegreeDistribution.explicit({2: 1.0}).size_biased
    rng = np.random.default_rng(3)
    assert {sample_size_biased(sb, rng) for _ in range(50)} == {1}


def test_size_biased_mean_is_nu():
    d = DegreeDistribution.pareto(4.0)
    x = d.size_biased.sample(np.random.default_rng(4), 10**6).astype(float)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - d.nu) <= 3 * se


def test_size_biased_tail_sampler():
    # the table stops at 2**16; the rejection tail must still follow k f_k
    d = DegreeDistribution.pareto(2.2)
    sb = d.size_biased
    x = sb.sample(np.random.default_rng(5), 2 * 10**6)
    big = x >= 2**17
    expected = float(sb.tail_mass) * ((2**16 + 1) / (2**17 + 1)) ** (d.tau - 2.0)
    assert abs(big.mean() - expected) < 5 * math.sqrt(expected / x.size)


def test_pgf_edges():
    sb = DegreeDistribution.pareto(4.0).size_biased
    assert sb.pgf(1.0) == 1.0
    assert sb.pgf(0.0) == pytest.approx(float(sb.table[0]))
    # slope at 1 is the mean
    e = 1e-6
    assert sb.one_minus_pgf(1 - e) / e == pytest.approx(sb.mean, rel=1e-3)


@pytest.mark.parametrize("bad", [{}, {1: 1.0}, {2: 0.6, 3: 0.6}, {2: -0.1, 3: 1.1}])
def test_explicit_rejects(bad):
    with pytest.raises(ValueError):
        DegreeDistribution.explicit(bad)


def test_test_mode_allows_small_degrees():
    d = DegreeDistribution.explicit({1: 0.5, 2: 0.5}, test_mode=True)
    assert d.mu == pytest.approx(1.5)


def test_labels_round_trip():
    from fppcm.experiments import dist_from_label

    for d in (DegreeDistribution.pareto(2.5), DegreeDistribution.explicit({2: 1 / 3, 5: 2 / 3})):
        assert dist_from_label(d.label) == d


@settings(max_examples=40, deadline=None)
@given(tau=st.floats(2.05, 8.0), seed=st.integers(0, 2**32 - 1))
def test_samples_at_least_two(tau, seed):
    x = DegreeDistribution.pareto(tau).sample(np.random.default_rng(seed), 1000)
    assert x.min() >= 2


@settings(max_examples=40, deadline=None)
@given(tau=st.floats(2.05, 8.0), k=st.integers(2, 10**6))
def test_survival_formula(tau, k):
    d = DegreeDistribution.pareto(tau)
    assert float(d.survival(k)) == pytest.approx((2 / k) ** (tau - 1), rel=1e-12)
    assert float(d.pmf(k)) == pytest.approx(float(d.survival(k) - d.survival(k + 1)), rel=1e-9, abs=1e-300)
