import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppcm.errors import DeadProcess
from fppcm.stats import chi_square_gof
from fppcm.tree import (
    coupled_generations,
    exact_generation_pmf,
    harmonic_number,
    recursion_generation_pmf,
    s_values,
    sample_gm_tm,
    sample_gm_tm_batch,
    sample_trace,
    simulate_construction,
    simulate_construction_batch,
)


def test_s_values():
    assert s_values([3, 2, 2]).tolist() == [3, 4, 5]
    assert s_values([2]).tolist() == [2]
    assert s_values([2, 0]).tolist() == [2, 1]


def test_dead_process():
    with pytest.raises(DeadProcess):
        exact_generation_pmf([2, 0, 0], 3)


def test_first_generation_is_one():
    rng = np.random.default_rng(0)
    assert all(sample_gm_tm([3, 2], 1, rng)[0] == 1 for _ in range(20))
    assert simulate_construction([3, 0, 2], 1, rng)[0] == 1


def test_two_step_pmf():
    pmf = exact_generation_pmf([2, 2], 2)
    assert pmf[1] == pytest.approx(1 / 3)
    assert pmf[2] == pytest.approx(2 / 3)


def test_expected_split_time():
    _, t = sample_gm_tm_batch([3, 2, 2], 3, np.random.default_rng(1), 10**6)
    sd = math.sqrt(1 / 9 + 1 / 16 + 1 / 25)
    assert abs(t.mean() - 47 / 60) <= 3 * sd / 1000


def test_convolution_matches_recursion():
    for degs in ([3, 2, 2], [2, 3, 0, 2, 3, 3, 0, 2], [3, 0, 0, 2]):
        a = exact_generation_pmf(degs, len(degs))
        b = recursion_generation_pmf(degs, len(degs))
        assert a.keys() == b.keys()
        for k in a:
            assert abs(a[k] - b[k]) <= 1e-14


def test_three_step_exact_fractions():
    # I_2 ~ Bern(2/4), I_3 ~ Bern(2/5)
    pmf = exact_generation_pmf([3, 2, 2], 3)
    want = {1: Fraction(1, 2) * Fraction(3, 5), 2: Fraction(1, 2) * Fraction(3, 5) + Fraction(1, 2) * Fraction(2, 5), 3: Fraction(1, 2) * Fraction(2, 5)}
    for k, v in want.items():
        assert pmf[k] == pytest.approx(float(v), abs=1e-15)


def test_brute_force_two_step():
    g, _ = simulate_construction_batch([2, 2], 2, np.random.default_rng(2), 10**6)
    p = (g == 2).mean()
    assert abs(p - 2 / 3) <= 3 * math.sqrt(2 / 9 / 1e6)


def test_brute_force_five_step_chi_square():
    degs = [3, 2, 2, 2, 2]
    g, t = simulate_construction_batch(degs, 5, np.random.default_rng(3), 10**6)
    pmf = exact_generation_pmf(degs, 5)
    obs = np.bincount(g, minlength=6)[1:6]
    exp = np.array([pmf.get(k, 0.0) for k in range(1, 6)])
    assert chi_square_gof(obs, exp).pvalue > 1e-3
    s = s_values(degs)
    assert abs(t[:, -1].mean() - np.sum(1 / s)) <= 3 * math.sqrt(np.sum(1 / s**2) / 1e6)


def test_brute_force_times_increase():
    _, t = simulate_construction_batch([3, 0, 2, 2, 0], 5, np.random.default_rng(4), 1000)
    assert np.all(np.diff(t, axis=1) >= 0)


def test_trace_csv(tmp_path):
    tr = sample_trace([3, 2, 0], 3, np.random.default_rng(5))
    p = tmp_path / "trace.csv"
    with open(p, "w") as fh:
        tr.write_csv(fh)
    rows = p.read_text().splitlines()
    assert rows[0] == "i,d_i,s_i,I_i,E_i"
    assert len(rows) == 4
    assert tr.generation == int(tr.indicators.sum())


@settings(max_examples=60, deadline=None)
@given(degs=st.lists(st.sampled_from([0, 2, 3, 4]), min_size=1, max_size=12))
def test_pmf_normalized(degs):
    if degs[0] == 0 or (s_values(degs) < 1).any():
        return
    pmf = exact_generation_pmf(degs, len(degs))
    assert abs(math.fsum(pmf.values()) - 1.0) <= 1e-12
    assert min(pmf) >= 1 and max(pmf) <= len(degs)


@settings(max_examples=30, deadline=None)
@given(degs=st.lists(st.integers(1, 5), min_size=1, max_size=40), seed=st.integers(0, 10**6))
def test_ghat_below_g(degs, seed):
    g, gh = coupled_generations(degs, np.random.default_rng(seed), 200)
    assert np.all(gh <= g)


def test_harmonic_number():
    assert harmonic_number(100) == pytest.approx(5.187377517639621)
