import numpy as np
import pytest
from hypothesis import given

from kcore_ocs.allocation import (LEXICOGRAPHIC, greedy_allocate, load_only_allocate,
                                  prefix_core_matrices, sorted_flows)
from kcore_ocs.bounds import port_stats, single_core_lb
from kcore_ocs.model import make_instance
from kcore_ocs.ordering import CoflowOrder

from conftest import instances


def _diag(n, entries):
    d = np.zeros((n, n))
    for (i, j), v in entries.items():
        d[i, j] = v
    return d


def test_single_core_takes_everything(rng):
    d = rng.uniform(0, 3, (3, 3))
    inst = make_instance([d], [5.0], delay=2.0)
    al = greedy_allocate(inst, CoflowOrder.identity(1))
    assert np.allclose(al.core_matrix(0, 0, 3), d)


def test_two_core_worked_example():
    inst = make_instance([_diag(2, {(0, 0): 4.0, (1, 1): 2.0})], [1.0, 2.0], delay=1.0)
    al = greedy_allocate(inst, CoflowOrder.identity(1))
    assert al.core_of(0, 0, 0) == 1      # lb 3 on the fast core vs 5
    assert al.core_of(0, 1, 1) == 0      # tie at 3, lowest index wins


def test_identical_cores_single_flow_lowest_index():
    inst = make_instance([_diag(2, {(0, 1): 7.0})], [3.0, 3.0, 3.0], delay=1.0)
    assert greedy_allocate(inst, CoflowOrder.identity(1)).core_of(0, 0, 1) == 0


def test_load_only_differs_when_delay_dominates():
    # second flow shares ingress 0; greedy pays tau*delta on the fast core, load-only ignores it
    inst = make_instance([_diag(2, {(0, 0): 2.0, (0, 1): 2.0})], [2.0, 1.0], delay=1.0)
    g = greedy_allocate(inst, CoflowOrder.identity(1))
    lo = load_only_allocate(inst, CoflowOrder.identity(1))
    assert g.core_of(0, 0, 0) == lo.core_of(0, 0, 0) == 0
    assert g.core_of(0, 0, 1) == 1
    assert lo.core_of(0, 0, 1) == 0


@given(instances(max_m=4, max_n=4, max_k=3))
def test_load_only_equals_greedy_without_delay(inst):
    inst = inst.with_config(type(inst.config)(inst.config.num_ports, inst.config.core_rates, 0.0))
    order = CoflowOrder(tuple(reversed(range(inst.num_coflows))))
    assert greedy_allocate(inst, order).parts == load_only_allocate(inst, order).parts


def test_flow_order_ties_lexicographic():
    d = _diag(3, {(2, 0): 5.0, (0, 2): 5.0, (1, 1): 9.0})
    assert [(i, j) for i, j, _ in sorted_flows(d)] == [(1, 1), (0, 2), (2, 0)]
    assert [(i, j) for i, j, _ in sorted_flows(d, LEXICOGRAPHIC)] == [(0, 2), (1, 1), (2, 0)]
    with pytest.raises(ValueError):
        sorted_flows(d, "random")


@given(instances(max_m=5, max_n=4, max_k=4))
def test_conservation_no_split_and_prefix_bound(inst):
    order = CoflowOrder(tuple(np.random.default_rng(inst.num_coflows).permutation(inst.num_coflows)))
    al = greedy_allocate(inst, order)
    cfg = inst.config
    N = cfg.num_ports
    for m, c in enumerate(inst.coflows):
        total = sum(al.core_matrix(m, k, N) for k in range(cfg.num_cores))
        assert np.array_equal(total, c.demand)
        holders = [sum(1 for k in range(cfg.num_cores) if (i, j) in al.parts[m][k]) for i, j, _ in c.flows()]
        assert all(h == 1 for h in holders)
    agg = np.zeros((N, N))
    for rank, m in enumerate(order):
        agg += inst.coflows[m].demand
        s = port_stats(agg)
        lhs = max(single_core_lb(mat, r, cfg.delay)
                  for mat, r in zip(prefix_core_matrices(inst, al)[rank], cfg.core_rates))
        rhs = s.max_load / cfg.max_rate + s.max_count * cfg.delay
        assert lhs <= rhs * (1 + 1e-9) + 1e-12


def test_deterministic(rng):
    from conftest import random_instance
    inst = random_instance(rng)
    o = CoflowOrder.identity(inst.num_coflows)
    assert greedy_allocate(inst, o) == greedy_allocate(inst, o)


def test_order_mismatch_rejected():
    inst = make_instance([np.ones((1, 1))] * 2, [1.0])
    with pytest.raises(ValueError):
        greedy_allocate(inst, CoflowOrder.identity(3))
