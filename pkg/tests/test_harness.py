import json

import numpy as np
import pytest

from kcore_ocs import harness as h
from kcore_ocs.lp_relax import solve_instance
from kcore_ocs.metrics import records_to_csv
from kcore_ocs.model import Instance, NetworkConfig, make_instance

from conftest import random_instance


def test_wiring_table():
    assert set(h.SCHEMES) == {"OURS", "WSPT-ORDER", "LOAD-ONLY", "SUNFLOW-S", "BVN-S"}


def test_empty_instance_every_scheme_zero():
    inst = Instance(NetworkConfig(3, (1.0, 2.0), 1.0))
    for s, (res, rec) in h.compare(inst).items():
        assert rec.total_weighted_cct == 0 and res.events == []


def test_unknown_scheme():
    with pytest.raises(ValueError):
        h.run_scheme(make_instance([np.eye(2)], [1.0]), "FASTEST")


def test_lower_bound_dominance_200():
    rng = np.random.default_rng(77)
    for _ in range(200):
        inst = random_instance(rng, max_m=8, max_n=4, max_k=3)
        lp = solve_instance(inst)
        for s, (res, rec) in h.compare(inst).items():
            assert lp.objective <= rec.total_weighted_cct * (1 + 1e-6) + 1e-9, s


def test_records_and_normalization(rng):
    inst = random_instance(rng, max_m=6)
    out = h.compare(inst, seed=4)
    ours = out[h.OURS][1]
    assert ours.normalized_weighted_cct == 1.0
    assert 1 - 1e-6 <= ours.approx_ratio <= 25
    for s, (_, rec) in out.items():
        assert rec.normalized_weighted_cct == pytest.approx(rec.total_weighted_cct / ours.total_weighted_cct)
        assert rec.p99_cct >= rec.p95_cct and rec.seed == 4
        assert (rec.approx_ratio is None) == (s != h.OURS)


def test_feasibility_failure_aborts(monkeypatch):
    inst = make_instance([np.eye(2)], [1.0], delay=1.0)
    monkeypatch.setattr(h, "check_feasibility", lambda *a, **k: ["port conflict (injected)"])
    with pytest.raises(h.FeasibilityError, match="injected"):
        h.run_scheme(inst, h.OURS)
    recs = h.compare(inst, (h.OURS,), on_error="record")
    assert recs[h.OURS][1].status == "error"


def test_sweep_cardinality_and_seed_reuse():
    plan = h.ExperimentPlan(source={"kind": "synthetic"}, schemes=(h.OURS, h.BVN_S), sweep_axis="delay",
                            sweep_values=(2, 4, 6, 8, 10, 12), repetitions=2, num_ports=4, num_coflows=4)
    streamed = []
    recs = h.run_sweep(plan, streamed.append)
    assert len(recs) == 6 * 2 * 2 == len(streamed)
    assert all(r.status == "ok" for r in recs)
    assert [r.delay for r in recs if r.scheme == h.OURS][:4] == [2, 2, 4, 4]
    # the same repetition sees the same traffic whatever the delay
    a = h.cell_instance(plan, 2, 1)
    b = h.cell_instance(plan, 12, 1)
    assert all(np.array_equal(x.demand, y.demand) for x, y in zip(a.coflows, b.coflows))


def test_sweep_zero_repetitions():
    assert h.run_sweep(h.ExperimentPlan(repetitions=0)) == []


def test_sweep_reproducible_csv():
    plan = h.ExperimentPlan(source={"kind": "fb-like"}, schemes=h.SCHEMES, repetitions=2,
                            num_ports=5, num_coflows=8)
    assert records_to_csv(h.run_sweep(plan)) == records_to_csv(h.run_sweep(plan))


def test_failed_cell_recorded_and_sweep_continues():
    plan = h.ExperimentPlan(source={"kind": "synthetic"}, schemes=(h.OURS,), sweep_axis="ports",
                            sweep_values=(0, 3), repetitions=1, num_coflows=3)
    recs = h.run_sweep(plan)
    assert [r.status for r in recs] == ["error", "ok"]


def test_core_sweep_table_configurations():
    plan = h.ExperimentPlan(source={"kind": "synthetic"}, schemes=(h.OURS,), sweep_axis="cores",
                            sweep_values=tuple(h.IMBALANCED_RATES.values()), repetitions=1,
                            num_ports=4, num_coflows=3)
    recs = h.run_sweep(plan)
    assert [r.K for r in recs] == [3, 4, 5]
    assert recs[1].rates == (5.0, 10.0, 20.0, 25.0)


def test_plan_json_round_trip_and_validation():
    plan = h.ExperimentPlan(sweep_axis="delay", sweep_values=(2, 4), repetitions=3)
    again = h.ExperimentPlan.from_json(plan.to_json())
    assert again == plan
    with pytest.raises(ValueError, match="schemes"):
        h.ExperimentPlan.from_dict({"source": {"kind": "fb-like"}, "schemes": ["NOPE"]})
    with pytest.raises(ValueError):
        h.ExperimentPlan(schemes=())
    with pytest.raises(ValueError):
        h.ExperimentPlan(sweep_axis="delay")


def test_eps_mode_plan():
    plan = h.ExperimentPlan(source={"kind": "synthetic"}, schemes=(h.OURS, h.WSPT_ORDER), mode="eps",
                            num_ports=3, num_coflows=4)
    recs = h.run_sweep(plan)
    assert all(r.mode == "eps" and r.delay == 0 and r.status == "ok" for r in recs)
