"""Scheme wiring, single runs and parameter sweeps."""
from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field, replace

import jsonschema
import numpy as np

from . import trace_io
from .allocation import greedy_allocate, load_only_allocate
from .circuit_sim import (ScheduleResult, check_feasibility, simulate_all_stop_bvn,
                          simulate_coflow_exclusive, simulate_not_all_stop)
from .lp_relax import LpSolution, LpStatus, LpError, solve_instance
from .metrics import ExperimentRecord, approx_ratio, normalized_weighted_cct, percentile_cct
from .model import Instance, NetworkConfig, SwitchMode, require_valid
from .ordering import lp_guided_order, wspt_order

OURS = "OURS"
WSPT_ORDER = "WSPT-ORDER"
LOAD_ONLY = "LOAD-ONLY"
SUNFLOW_S = "SUNFLOW-S"
BVN_S = "BVN-S"
SCHEMES = (OURS, WSPT_ORDER, LOAD_ONLY, SUNFLOW_S, BVN_S)

# Table III rate vectors
IMBALANCED_RATES = {3: (10.0, 20.0, 30.0), 4: (5.0, 10.0, 20.0, 25.0), 5: (5.0, 5.0, 10.0, 15.0, 25.0)}
BALANCED_RATES = {3: (20.0, 20.0, 20.0), 4: (15.0, 15.0, 15.0, 15.0), 5: (12.0, 12.0, 12.0, 12.0, 12.0)}


class FeasibilityError(RuntimeError):
    def __init__(self, scheme: str, report: list[str]):
        self.scheme = scheme
        self.report = report
        head = "\n  ".join(report[:10])
        super().__init__(f"{scheme}: infeasible schedule ({len(report)} violations)\n  {head}")


_WIRING = {
    OURS: ("lp", greedy_allocate, simulate_not_all_stop),
    WSPT_ORDER: ("wspt", greedy_allocate, simulate_not_all_stop),
    LOAD_ONLY: ("lp", load_only_allocate, simulate_not_all_stop),
    SUNFLOW_S: ("lp", greedy_allocate, simulate_coflow_exclusive),
    BVN_S: ("lp", greedy_allocate, simulate_all_stop_bvn),
}


def schedule(instance: Instance, scheme: str, lp_solution: LpSolution | None = None,
             backend: str = "highs"):
    """Return (result, allocation, lp_solution) for one scheme."""
    if scheme not in _WIRING:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    require_valid(instance)
    ordering, allocate, simulate = _WIRING[scheme]
    if lp_solution is None and (ordering == "lp" or scheme == OURS):
        lp_solution = solve_instance(instance, backend)
    order = lp_guided_order(instance, lp_solution) if ordering == "lp" else wspt_order(instance)
    allocation = allocate(instance, order)
    result = simulate(instance.config, allocation, order, instance.coflows)
    return result, allocation, lp_solution


def run_scheme(instance: Instance, scheme: str, lp_solution: LpSolution | None = None, *,
               seed=None, release_policy: str = "zero", sweep_value=None,
               backend: str = "highs") -> tuple[ScheduleResult, ExperimentRecord]:
    t0 = time.perf_counter()
    result, allocation, lp_solution = schedule(instance, scheme, lp_solution, backend)
    report = check_feasibility(result, instance, allocation)
    if report:
        raise FeasibilityError(scheme, report)
    cfg = instance.config
    completion = result.completion
    rec = ExperimentRecord(
        scheme=scheme, K=cfg.num_cores, N=cfg.num_ports, M=instance.num_coflows,
        delay=float(cfg.reconfig_delay), rates=tuple(cfg.core_rates), seed=seed,
        release_policy=release_policy, total_weighted_cct=result.objective,
        p95_cct=percentile_cct(completion, 95) if completion.size else None,
        p99_cct=percentile_cct(completion, 99) if completion.size else None,
        mode=SwitchMode(cfg.mode).value, sweep_value=sweep_value,
    )
    if lp_solution is not None and lp_solution.status is LpStatus.OPTIMAL:
        rec.lp_bound = float(lp_solution.objective)
        if scheme == OURS:
            rec.approx_ratio = approx_ratio(result.objective, rec.lp_bound)
    if scheme == OURS:
        rec.normalized_weighted_cct = 1.0 if result.objective > 0 else None
    rec.runtime_seconds = time.perf_counter() - t0
    return result, rec


def compare(instance: Instance, schemes=SCHEMES, *, seed=None, release_policy: str = "zero",
            sweep_value=None, backend: str = "highs", on_error=None) -> dict:
    """Run several schemes on one instance, solving the LP once.

    Returns scheme -> (result or None, record). A scheme that fails gets a
    record with status "error" when ``on_error`` is "record", otherwise the
    exception propagates.
    """
    needs_lp = any(_WIRING[s][0] == "lp" for s in schemes) or OURS in schemes
    t0 = time.perf_counter()
    lp = solve_instance(instance, backend) if needs_lp else None
    lp_time = time.perf_counter() - t0
    if lp is not None and lp.status is not LpStatus.OPTIMAL:
        raise LpError(f"ordering LP ended {lp.status.value}")
    out = {}
    for s in schemes:
        try:
            res, rec = run_scheme(instance, s, lp, seed=seed, release_policy=release_policy,
                                  sweep_value=sweep_value, backend=backend)
            rec.runtime_seconds += lp_time
        except (FeasibilityError, LpError, ValueError) as exc:
            if on_error != "record":
                raise
            cfg = instance.config
            rec = ExperimentRecord(s, cfg.num_cores, cfg.num_ports, instance.num_coflows,
                                   float(cfg.reconfig_delay), tuple(cfg.core_rates), seed,
                                   release_policy, float("nan"), mode=SwitchMode(cfg.mode).value,
                                   sweep_value=sweep_value, status="error", error=str(exc).splitlines()[0])
            res = None
        out[s] = (res, rec)
    if OURS in out and out[OURS][0] is not None:
        ref = out[OURS][1].total_weighted_cct
        for s, (res, rec) in out.items():
            if res is not None and ref > 0:
                rec.normalized_weighted_cct = normalized_weighted_cct(rec.total_weighted_cct, ref)
    return out


# --------------------------------------------------------------------------- plans

SWEEP_AXES = ("none", "delay", "ports", "cores")

PLAN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["source"],
    "properties": {
        "source": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["canonical", "trace", "fb-like", "synthetic"]},
                "path": {"type": "string"},
                "trace_seed": {"type": "integer"},
                "density": {"type": "number"},
                "volume_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "unselected": {"enum": [trace_io.REMAP, trace_io.DROP]},
                "time_unit": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "schemes": {"type": "array", "minItems": 1, "items": {"enum": list(SCHEMES)}},
        "sweep_axis": {"enum": list(SWEEP_AXES)},
        "sweep_values": {"type": "array"},
        "repetitions": {"type": "integer", "minimum": 0},
        "base_seed": {"type": "integer"},
        "num_ports": {"type": "integer", "minimum": 1},
        "num_coflows": {"type": "integer", "minimum": 0},
        "rates": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        "delay": {"type": "number", "minimum": 0},
        "mode": {"enum": [m.value for m in SwitchMode]},
        "release_policy": {"type": "string"},
        "weight_policy": {"enum": ["unit", "uniform-integer"]},
        "max_weight": {"type": "integer", "minimum": 1},
        "output": {"type": ["string", "null"]},
        "format": {"enum": ["csv", "jsonl"]},
        "backend": {"enum": ["highs", "simplex"]},
    },
}


@dataclass
class ExperimentPlan:
    """Defaults mirror the reference setting: N=10, M=100, K=3, rates (10,20,30), delay 8."""

    source: dict = field(default_factory=lambda: {"kind": "fb-like"})
    schemes: tuple[str, ...] = SCHEMES
    sweep_axis: str = "none"
    sweep_values: tuple = ()
    repetitions: int = 1
    base_seed: int = 0
    num_ports: int = 10
    num_coflows: int = 100
    rates: tuple[float, ...] = (10.0, 20.0, 30.0)
    delay: float = 8.0
    mode: str = "ocs"
    release_policy: str = "zero"
    weight_policy: str = "unit"
    max_weight: int = 10
    output: str | None = None
    format: str = "csv"
    backend: str = "highs"

    def __post_init__(self):
        self.schemes = tuple(self.schemes)
        self.sweep_values = tuple(tuple(v) if isinstance(v, list) else v for v in self.sweep_values)
        self.rates = tuple(float(r) for r in self.rates)
        if not self.schemes:
            raise ValueError("plan needs at least one scheme")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown schemes {bad}")
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
        if self.sweep_axis != "none" and not self.sweep_values:
            raise ValueError("a sweep axis needs sweep values")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentPlan":
        try:
            jsonschema.validate(doc, PLAN_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(map(str, exc.absolute_path)) or "<root>"
            raise ValueError(f"plan {where}: {exc.message}") from None
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentPlan":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        doc = asdict(self)
        doc["schemes"] = list(self.schemes)
        doc["sweep_values"] = [list(v) if isinstance(v, tuple) else v for v in self.sweep_values]
        doc["rates"] = list(self.rates)
        return json.dumps(doc, sort_keys=True, indent=1)

    def cells(self):
        """(sweep index, sweep value, repetition) in canonical order."""
        values = self.sweep_values if self.sweep_axis != "none" else (None,)
        for si, v in enumerate(values):
            for rep in range(self.repetitions):
                yield si, v, rep


_TRACE_CACHE: dict = {}


def _records(source: dict):
    kind = source["kind"]
    key = (kind, source.get("path"), source.get("trace_seed"))
    if key not in _TRACE_CACHE:
        if kind == "trace":
            with open(source["path"]) as fh:
                _TRACE_CACHE[key] = trace_io.ingest_fb_trace(fh.read())
        else:
            _TRACE_CACHE[key] = trace_io.synth_fb_like_trace(seed=source.get("trace_seed", 2010))
    return _TRACE_CACHE[key]


def cell_instance(plan: ExperimentPlan, sweep_value, rep: int) -> Instance:
    """Build the instance for one cell. The seed depends on the repetition only,
    so every sweep value sees the same sampled traffic."""
    seed = plan.base_seed + rep
    n, rates, delay = plan.num_ports, plan.rates, plan.delay
    if plan.sweep_axis == "delay":
        delay = float(sweep_value)
    elif plan.sweep_axis == "ports":
        n = int(sweep_value)
    elif plan.sweep_axis == "cores":
        rates = tuple(float(r) for r in sweep_value)
    mode = SwitchMode(plan.mode)
    if mode == SwitchMode.EPS:
        delay = 0.0
    src = plan.source
    kind = src["kind"]
    if kind == "canonical":
        inst = trace_io.load_instance(src["path"])
        cfg = NetworkConfig(inst.config.num_ports, inst.config.core_rates if plan.sweep_axis != "cores" else rates,
                            delay if plan.sweep_axis == "delay" else inst.config.reconfig_delay, inst.config.mode)
        return inst.with_config(cfg)
    if kind == "synthetic":
        return trace_io.synth_generate(n, plan.num_coflows, rates, delay, src.get("density", 0.3),
                                       tuple(src.get("volume_range", (1.0, 100.0))), seed,
                                       release_policy=plan.release_policy, weight_policy=plan.weight_policy,
                                       max_weight=plan.max_weight, mode=mode)
    return trace_io.sample_instance(_records(src), n, plan.num_coflows, seed, rates=rates, delay=delay,
                                    mode=mode, weight_policy=plan.weight_policy, max_weight=plan.max_weight,
                                    release_policy=plan.release_policy, time_unit=src.get("time_unit", 1.0),
                                    unselected=src.get("unselected", trace_io.REMAP))


def run_sweep(plan: ExperimentPlan, sink=None) -> list[ExperimentRecord]:
    """Run every cell and scheme; ``sink(record)`` is called as records are produced.

    A failing cell yields error records for its schemes and the sweep moves on.
    """
    records = []
    for si, value, rep in plan.cells():
        seed = plan.base_seed + rep
        try:
            inst = cell_instance(plan, value, rep)
            rows = [rec for _, rec in compare(inst, plan.schemes, seed=seed,
                                              release_policy=plan.release_policy,
                                              sweep_value=value, backend=plan.backend,
                                              on_error="record").values()]
        except Exception as exc:  # noqa: BLE001 -- one bad cell must not stop the sweep
            rows = [ExperimentRecord(s, len(plan.rates), plan.num_ports, plan.num_coflows, plan.delay,
                                     plan.rates, seed, plan.release_policy, float("nan"), mode=plan.mode,
                                     sweep_value=value, status="error", error=f"{type(exc).__name__}: {exc}")
                    for s in plan.schemes]
        for rec in rows:
            records.append(rec)
            if sink is not None:
                sink(rec)
    return records


def mean_by_scheme(records, attr: str = "normalized_weighted_cct") -> dict:
    out = {}
    for s in dict.fromkeys(r.scheme for r in records):
        vals = [getattr(r, attr) for r in records if r.scheme == s and r.status == "ok"
                and getattr(r, attr) is not None]
        out[s] = float(np.mean(vals)) if vals else float("nan")
    return out


def default_plan(**overrides) -> ExperimentPlan:
    return replace(ExperimentPlan(), **overrides)


def trace_path_from_env() -> str | None:
    """Location of the public trace file if the user provides one."""
    path = os.environ.get("KCORE_OCS_FB_TRACE")
    return path if path and os.path.exists(path) else None
