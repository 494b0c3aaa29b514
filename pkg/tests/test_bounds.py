import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kcore_ocs.bounds import PrefixState, global_single_coflow_lb, port_stats, prefix_add, single_core_lb
from kcore_ocs.model import NetworkConfig, SwitchMode


def test_port_stats_zero():
    s = port_stats(np.zeros((3, 3)))
    assert s.max_load == 0 and s.max_count == 0
    assert not s.load.any() and not s.count.any()


def test_port_stats_diagonal():
    s = port_stats(np.array([[4.0, 0], [0, 2]]))
    assert list(s.load) == [4, 2, 4, 2]
    assert list(s.count) == [1, 1, 1, 1]
    assert s.max_load == 4 and s.max_count == 1


def test_port_stats_mixed():
    s = port_stats(np.array([[4.0, 2], [0, 2]]))
    assert list(s.load) == [6, 2, 4, 4]
    assert list(s.count) == [2, 1, 1, 2]
    assert s.max_load == 6 and s.max_count == 2


def test_single_core_lb_examples():
    assert single_core_lb(np.zeros((2, 2)), 3.0, 5.0) == 0
    assert single_core_lb(np.array([[4.0]]), 2.0, 1.0) == 3
    assert single_core_lb(np.array([[4.0, 2], [0, 2]]), 2.0, 1.0) == 5
    with pytest.raises(ValueError):
        single_core_lb(np.ones((1, 1)), 0.0, 1.0)


def test_global_lb_examples():
    d = np.array([[12.0, 0], [0, 3]])
    ocs = NetworkConfig(2, (10.0, 20.0, 30.0), 8.0)
    assert global_single_coflow_lb(d, ocs) == pytest.approx(8.2)
    assert global_single_coflow_lb(d, ocs.with_mode(SwitchMode.EPS)) == pytest.approx(0.2)
    assert global_single_coflow_lb(np.zeros((2, 2)), ocs) == 0


def test_prefix_add_same_entry_twice():
    st_ = PrefixState(2, (1.0,), 1.0)
    prefix_add(st_, 0, 0, 1, 3.0)
    s1 = st_.stats(0)
    assert s1.max_load == 3 and s1.max_count == 1
    prefix_add(st_, 0, 0, 1, 2.0)
    s2 = st_.stats(0)
    assert list(s2.load) == [5, 0, 0, 5] and list(s2.count) == [1, 0, 0, 1]


def test_prefix_add_errors():
    st_ = PrefixState(2, (1.0, 2.0), 1.0)
    with pytest.raises(IndexError):
        st_.add(2, 0, 0, 1.0)
    with pytest.raises(IndexError):
        st_.add(0, 0, 2, 1.0)
    with pytest.raises(ValueError):
        st_.add(0, 0, 0, 0.0)


@given(st.integers(0, 2**31), st.integers(1, 5), st.integers(1, 3))
def test_prefix_incremental_matches_recompute(seed, n, k):
    rng = np.random.default_rng(seed)
    rates = tuple(rng.uniform(1, 10, k))
    delay = float(rng.uniform(0, 5))
    state = PrefixState(n, rates, delay)
    mats = [np.zeros((n, n)) for _ in range(k)]
    for _ in range(rng.integers(1, 30)):
        c, i, j, d = int(rng.integers(k)), int(rng.integers(n)), int(rng.integers(n)), float(rng.uniform(0.1, 9))
        state.add(c, i, j, d)
        mats[c][i, j] += d
        # tentative bound must equal the bound of the matrix it describes
    for c in range(k):
        fresh = port_stats(mats[c])
        inc = state.stats(c)
        assert np.array_equal(inc.count, fresh.count)
        assert np.allclose(inc.load, fresh.load, rtol=1e-9, atol=0)
        assert state.lb(c) == pytest.approx(single_core_lb(mats[c], rates[c], delay), rel=1e-9)
        probe = mats[c].copy()
        probe[0, n - 1] += 1.5
        assert state.tentative_lb(c, 0, n - 1, 1.5) == pytest.approx(single_core_lb(probe, rates[c], delay), rel=1e-9)


@given(st.integers(0, 2**31))
def test_lb_monotone_in_entries_and_rate(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    d = np.where(rng.random((n, n)) < 0.5, rng.uniform(0, 10, (n, n)), 0.0)
    bigger = d + np.where(rng.random((n, n)) < 0.3, rng.uniform(0, 5, (n, n)), 0.0)
    r, delay = float(rng.uniform(0.5, 5)), float(rng.uniform(0, 3))
    assert single_core_lb(d, r, delay) <= single_core_lb(bigger, r, delay)
    assert single_core_lb(d, r * 2, delay) <= single_core_lb(d, r, delay)


def test_ingress_egress_totals_agree(rng):
    d = rng.uniform(0, 5, (4, 4))
    s = port_stats(d)
    assert s.load[:4].sum() == pytest.approx(s.load[4:].sum())
