import dataclasses

import numpy as np
import pytest
from hypothesis import given

from kcore_ocs.allocation import Allocation, greedy_allocate
from kcore_ocs.circuit_sim import (ALL_STOP, CircuitEvent, ScheduleError, ScheduleResult, check_feasibility,
                                   schedule_from_json, schedule_to_json, simulate_all_stop_bvn,
                                   simulate_coflow_exclusive, simulate_not_all_stop,
                                   work_conservation_violations)
from kcore_ocs.model import make_instance
from kcore_ocs.ordering import CoflowOrder

from conftest import instances

SIMS = (simulate_not_all_stop, simulate_coflow_exclusive, simulate_all_stop_bvn)


def _mat(n, entries):
    d = np.zeros((n, n))
    for (i, j), v in entries.items():
        d[i, j] = v
    return d


def _run(sim, inst, order=None):
    order = order or CoflowOrder.identity(inst.num_coflows)
    al = greedy_allocate(inst, order)
    return sim(inst.config, al, order, inst.coflows), al


def test_single_subflow_timing():
    inst = make_instance([_mat(1, {(0, 0): 2.0})], [1.0], delay=1.0)
    res, _ = _run(simulate_not_all_stop, inst)
    (e,) = res.events
    assert (e.setup_time, e.start_time, e.end_time) == (0.0, 1.0, 3.0)
    assert res.completion.tolist() == [3.0] and res.objective == 3.0


def test_shared_ingress_serializes():
    inst = make_instance([_mat(2, {(0, 0): 2.0}), _mat(2, {(0, 1): 3.0})], [1.0], delay=1.0)
    res, _ = _run(simulate_not_all_stop, inst)
    assert res.completion.tolist() == [3.0, 7.0]
    second = [e for e in res.events if e.coflow == 1][0]
    assert second.setup_time == 3.0


def test_disjoint_pairs_run_in_parallel():
    inst = make_instance([_mat(2, {(0, 0): 2.0, (1, 1): 5.0})], [1.0], delay=1.0)
    res, _ = _run(simulate_not_all_stop, inst)
    assert all(e.setup_time == 0.0 for e in res.events)


def test_release_delays_setup():
    inst = make_instance([_mat(1, {(0, 0): 2.0})], [2.0], delay=0.5, releases=[4.0])
    res, _ = _run(simulate_not_all_stop, inst)
    assert res.events[0].setup_time == 4.0 and res.completion[0] == 5.5


def test_exclusive_single_coflow_matches():
    inst = make_instance([_mat(3, {(0, 0): 2.0, (0, 1): 1.0, (2, 1): 4.0})], [1.0, 3.0], delay=1.0)
    a, _ = _run(simulate_not_all_stop, inst)
    b, _ = _run(simulate_coflow_exclusive, inst)
    assert a.events == b.events


def test_exclusive_serializes_disjoint_coflows():
    inst = make_instance([_mat(2, {(0, 0): 2.0}), _mat(2, {(1, 1): 2.0})], [1.0], delay=1.0)
    nas, _ = _run(simulate_not_all_stop, inst)
    exc, _ = _run(simulate_coflow_exclusive, inst)
    assert nas.completion.tolist() == [3.0, 3.0]
    assert exc.completion.tolist() == [3.0, 6.0]
    assert exc.objective >= nas.objective


def test_idle_core_has_no_events():
    inst = make_instance([_mat(2, {(0, 0): 1.0})], [1.0, 1.0], delay=0.5)
    for sim in SIMS:
        res, _ = _run(sim, inst)
        assert {e.core for e in res.events} == {0}


def test_bvn_permutation_single_configuration():
    inst = make_instance([_mat(3, {(0, 2): 6.0, (1, 0): 6.0, (2, 1): 6.0})], [3.0], delay=1.5, releases=[2.0])
    res, _ = _run(simulate_all_stop_bvn, inst)
    assert len(res.segments) == 1
    assert res.completion[0] == pytest.approx(2.0 + 1.5 + 6.0 / 3.0)


def test_bvn_stuffed_segment_credits_true_drain():
    inst = make_instance([_mat(2, {(0, 0): 4.0, (1, 1): 2.0})], [2.0], delay=1.0)
    res, _ = _run(simulate_all_stop_bvn, inst)
    assert res.segments == [(0, 0, 0.0, 3.0)]
    ends = {(e.ingress, e.egress): e.end_time for e in res.events}
    assert ends == {(0, 0): 3.0, (1, 1): 2.0}
    assert res.model == ALL_STOP


def test_inconsistent_allocation_rejected():
    inst = make_instance([_mat(2, {(0, 0): 1.0})], [1.0], delay=0.5)
    bad = Allocation((({(0, 0): 2.0},),), (((0, 0),),), CoflowOrder.identity(1), 1)
    for sim in SIMS:
        with pytest.raises(ScheduleError):
            sim(inst.config, bad, bad.order, inst.coflows)


def test_empty_coflow_completes_at_release():
    inst = make_instance([np.zeros((2, 2)), _mat(2, {(1, 0): 1.0})], [1.0], delay=1.0, releases=[3.0, 0.0])
    for sim in SIMS:
        res, al = _run(sim, inst)
        assert res.completion[0] == 3.0
        assert check_feasibility(res, inst, al) == []


@given(instances(max_m=5, max_n=4, max_k=3))
def test_every_simulator_is_feasible(inst):
    order = CoflowOrder(tuple(np.random.default_rng(7).permutation(inst.num_coflows)))
    al = greedy_allocate(inst, order)
    for sim in SIMS:
        res = sim(inst.config, al, order, inst.coflows)
        assert check_feasibility(res, inst, al) == []
        assert check_feasibility(res, inst) == []


@given(instances(max_m=5, max_n=4, max_k=2))
def test_not_all_stop_is_work_conserving_and_deterministic(inst):
    res, al = _run(simulate_not_all_stop, inst)
    assert work_conservation_violations(res, inst) == []
    again = simulate_not_all_stop(inst.config, al, al.order, inst.coflows)
    assert again.events == res.events


def _two_event_result():
    inst = make_instance([_mat(2, {(0, 0): 2.0, (0, 1): 3.0})], [1.0], delay=1.0, releases=[1.0])
    res, al = _run(simulate_not_all_stop, inst)
    assert check_feasibility(res, inst, al) == []
    return inst, res, al


def test_overlap_mutation_detected():
    inst, res, al = _two_event_result()
    first, second = sorted(res.events, key=lambda e: e.setup_time)
    shift = second.setup_time - first.setup_time
    moved = dataclasses.replace(second, setup_time=first.setup_time, start_time=second.start_time - shift,
                                end_time=second.end_time - shift)
    bad = ScheduleResult([first, moved], {}, res.completion, res.objective)
    assert any("port conflict" in v for v in check_feasibility(bad, inst, al))


def test_early_setup_mutation_detected():
    inst, res, al = _two_event_result()
    e = res.events[0]
    early = dataclasses.replace(e, setup_time=e.setup_time - 1, start_time=e.start_time - 1, end_time=e.end_time - 1)
    bad = ScheduleResult([early] + res.events[1:], {}, res.completion, res.objective)
    assert any("release violation" in v for v in check_feasibility(bad, inst, al))


def test_other_mutations_detected():
    inst, res, al = _two_event_result()
    e = res.events[0]
    short = dataclasses.replace(e, end_time=e.end_time - 0.5)
    rep = check_feasibility(ScheduleResult([short] + res.events[1:], {}, res.completion, res.objective), inst, al)
    assert any("duration" in v for v in rep)
    rep = check_feasibility(ScheduleResult(res.events[1:], {}, res.completion, res.objective), inst, al)
    assert any("volume mismatch" in v for v in rep)
    rep = check_feasibility(ScheduleResult(res.events, {}, res.completion + 1, res.objective), inst, al)
    assert any("completion" in v for v in rep)


def test_all_stop_segment_overlap_detected():
    inst = make_instance([_mat(2, {(0, 0): 4.0, (1, 1): 2.0}), _mat(2, {(0, 1): 1.0})], [2.0], delay=1.0)
    res, al = _run(simulate_all_stop_bvn, inst)
    assert check_feasibility(res, inst, al) == []
    k, m, b, e = res.segments[1]
    bad = ScheduleResult(res.events, {}, res.completion, res.objective, ALL_STOP,
                         [res.segments[0], (k, m, b - 1.0, e)])
    assert any("overlap" in v for v in check_feasibility(bad, inst, al))


def test_event_log_round_trip(rng):
    from conftest import random_instance
    inst = random_instance(rng)
    res, _ = _run(simulate_all_stop_bvn, inst)
    text = schedule_to_json(res, inst)
    back = schedule_from_json(text)
    assert back.events == res.events and back.segments == res.segments
    assert np.array_equal(back.completion, res.completion) and back.model == res.model
    assert set(__import__("json").loads(text)["events"][0]) == {f.name for f in dataclasses.fields(CircuitEvent)}
