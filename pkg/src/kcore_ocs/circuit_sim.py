"""Intra-core circuit scheduling simulators and the schedule feasibility checker.

Every core runs independently. A subflow occupies both of its ports from its
circuit setup until its last byte: [setup, setup + delay + volume / rate).

Three dispatch disciplines are provided:

* not-all-stop: event-driven greedy port matching. At each decision point
  (time 0, every release, every circuit end) released subflows are scanned in
  global priority order and every one whose ingress and egress are both idle
  is started on the spot.
* coflow-exclusive: one coflow at a time per core, the same greedy matching
  inside it (stand-in for the Sunflow scheduler).
* all-stop BvN: one coflow at a time per core; its core matrix is stuffed and
  Birkhoff-decomposed, and each permutation is held for weight / rate after a
  core-wide reconfiguration of length delay.
"""
from __future__ import annotations

import bisect
import heapq
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bvn
from .allocation import Allocation
from .model import Instance, NetworkConfig

NOT_ALL_STOP = "not-all-stop"
ALL_STOP = "all-stop"
EVENT_LOG_VERSION = 1


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class CircuitEvent:
    core: int
    coflow: int          # input position of the coflow in the instance
    ingress: int
    egress: int
    setup_time: float
    start_time: float
    end_time: float
    volume: float


@dataclass
class ScheduleResult:
    events: list[CircuitEvent]
    per_core_completion: dict[tuple[int, int], float]
    completion: np.ndarray
    objective: float
    model: str = NOT_ALL_STOP
    segments: list[tuple[int, int, float, float]] = field(default_factory=list)  # (core, coflow, begin, end)


def _check_allocation(config: NetworkConfig, allocation: Allocation, coflows):
    if allocation.num_cores != config.num_cores:
        raise ScheduleError("allocation core count differs from the network")
    if len(allocation.parts) != len(coflows):
        raise ScheduleError("allocation covers a different number of coflows")
    n = config.num_ports
    for m, c in enumerate(coflows):
        total = np.zeros((n, n))
        for part in allocation.parts[m]:
            for (i, j), v in part.items():
                if not (0 <= i < n and 0 <= j < n) or v <= 0:
                    raise ScheduleError(f"coflow {m}: bad allocated entry ({i},{j})={v}")
                total[i, j] += v
        if not np.allclose(total, c.demand, rtol=1e-9, atol=0.0):
            raise ScheduleError(f"coflow {m}: allocation does not conserve demand")


def dispatch_core(jobs, rate: float, delay: float, releases, num_ports: int,
                  core: int = 0, start_time: float = 0.0) -> list[CircuitEvent]:
    """Non-delay greedy port matching for one core.

    ``jobs`` is a list of (coflow, ingress, egress, volume) in priority order.
    Returns one event per job, aligned with ``jobs``.
    """
    n_jobs = len(jobs)
    events: list[CircuitEvent | None] = [None] * n_jobs
    if not n_jobs:
        return []
    rel = [max(float(releases[m]), start_time) for m, _, _, _ in jobs]
    by_release = sorted(range(n_jobs), key=lambda q: (rel[q], q))
    in_free = [start_time] * num_ports
    out_free = [start_time] * num_ports
    queues: dict[tuple[int, int], list[int]] = {}
    times = sorted(set(rel) | {start_time})
    heapq.heapify(times)
    ptr = 0
    remaining = n_jobs
    last = None
    while remaining:
        t = heapq.heappop(times)
        if t == last:
            continue
        last = t
        while ptr < n_jobs and rel[by_release[ptr]] <= t:
            q = by_release[ptr]
            _, i, j, _ = jobs[q]
            heapq.heappush(queues.setdefault((i, j), []), q)
            ptr += 1
        while True:
            best, best_pair = None, None
            for pair, heap in queues.items():
                if in_free[pair[0]] <= t and out_free[pair[1]] <= t:
                    if best is None or heap[0] < best:
                        best, best_pair = heap[0], pair
            if best is None:
                break
            heapq.heappop(queues[best_pair])
            if not queues[best_pair]:
                del queues[best_pair]
            m, i, j, v = jobs[best]
            start = t + delay
            end = start + v / rate
            in_free[i] = out_free[j] = end
            events[best] = CircuitEvent(core, m, i, j, t, start, end, v)
            heapq.heappush(times, end)
            remaining -= 1
    return events  # type: ignore[return-value]


def _finish(events, segments, coflows, model) -> ScheduleResult:
    per_core: dict[tuple[int, int], float] = {}
    for e in events:
        key = (e.coflow, e.core)
        per_core[key] = max(per_core.get(key, e.end_time), e.end_time)
    completion = np.array([c.release for c in coflows], dtype=float)
    for (m, _), t in per_core.items():
        completion[m] = max(completion[m], t)
    weights = np.array([c.weight for c in coflows], dtype=float)
    objective = float(weights @ completion) if len(coflows) else 0.0
    return ScheduleResult(list(events), per_core, completion, objective, model, list(segments))


def simulate_not_all_stop(config: NetworkConfig, allocation: Allocation, order, coflows) -> ScheduleResult:
    _check_allocation(config, allocation, coflows)
    releases = [c.release for c in coflows]
    events = []
    for k, rate in enumerate(config.core_rates):
        events += dispatch_core(allocation.subflows(k), rate, config.delay, releases,
                                config.num_ports, core=k)
    return _finish(events, [], coflows, NOT_ALL_STOP)


def _coflow_serial(config, allocation, coflows, serve):
    """Per core, serve one released coflow at a time in priority order."""
    events, segments = [], []
    for k in range(config.num_cores):
        pending = [m for m in allocation.order if allocation.parts[m][k]]
        t = 0.0
        while pending:
            ready = [m for m in pending if coflows[m].release <= t]
            if not ready:
                t = min(coflows[m].release for m in pending)
                continue
            m = ready[0]
            evs, segs, t_done = serve(k, m, t)
            events += evs
            segments += segs
            pending.remove(m)
            t = t_done
    return events, segments


def simulate_coflow_exclusive(config: NetworkConfig, allocation: Allocation, order, coflows) -> ScheduleResult:
    _check_allocation(config, allocation, coflows)
    releases = [c.release for c in coflows]

    def serve(k, m, t):
        part = allocation.parts[m][k]
        jobs = [(m, i, j, part[(i, j)]) for i, j in allocation.flow_order[m] if (i, j) in part]
        evs = dispatch_core(jobs, config.core_rates[k], config.delay, releases,
                            config.num_ports, core=k, start_time=t)
        return evs, [], max(e.end_time for e in evs)

    events, _ = _coflow_serial(config, allocation, coflows, serve)
    return _finish(events, [], coflows, NOT_ALL_STOP)


def simulate_all_stop_bvn(config: NetworkConfig, allocation: Allocation, order, coflows,
                          decompose=bvn.decompose) -> ScheduleResult:
    _check_allocation(config, allocation, coflows)
    n, delay = config.num_ports, config.delay

    def serve(k, m, t):
        rate = config.core_rates[k]
        residual = allocation.core_matrix(m, k, n)
        dec = decompose(residual)
        last_term = {}
        for q, (perm, _) in enumerate(dec.terms):
            for i, j in enumerate(perm):
                if residual[i, j] > 0:
                    last_term[(i, j)] = q
        evs, segs = [], []
        for q, (perm, w) in enumerate(dec.terms):
            begin = t
            start = begin + delay
            t = start + w / rate
            segs.append((k, m, begin, t))
            for i, j in enumerate(perm):
                left = float(residual[i, j])
                if left <= 0:
                    continue
                # the final term carrying (i, j) drains whatever float residue remains
                vol = left if last_term[(i, j)] == q else min(left, w)
                residual[i, j] = left - vol if vol < left else 0.0
                evs.append(CircuitEvent(k, m, i, j, begin, start, start + vol / rate, vol))
        return evs, segs, t

    events, segments = _coflow_serial(config, allocation, coflows, serve)
    return _finish(events, segments, coflows, ALL_STOP)


# --------------------------------------------------------------------------- checks

def _close(a, b, scale=1.0):
    return abs(a - b) <= 1e-9 * max(1.0, abs(scale))


def check_feasibility(result: ScheduleResult, instance: Instance,
                      allocation: Allocation | None = None, model: str | None = None) -> list[str]:
    """Return a list of violations (empty when the schedule is feasible).

    Without an allocation, per-flow volumes are checked against the demand
    matrices instead (conservation across cores).
    """
    model = model or result.model
    cfg = instance.config
    report = []
    n, K, M = cfg.num_ports, cfg.num_cores, instance.num_coflows
    delay = cfg.delay
    by_port: dict[tuple[int, str, int], list[tuple[float, float, int]]] = {}
    sent: dict[tuple[int, int, int, int], float] = {}
    counts: dict[tuple[int, int, int, int], int] = {}
    for q, e in enumerate(result.events):
        tag = f"event {q} (core {e.core}, coflow {e.coflow}, {e.ingress}->{e.egress})"
        if not (0 <= e.core < K and 0 <= e.coflow < M and 0 <= e.ingress < n and 0 <= e.egress < n):
            report.append(f"{tag}: index out of range")
            continue
        rel = instance.coflows[e.coflow].release
        if e.setup_time < rel - 1e-9 * max(1.0, rel):
            report.append(f"{tag}: release violation, setup {e.setup_time} < release {rel}")
        if not _close(e.start_time, e.setup_time + delay, e.start_time):
            report.append(f"{tag}: transmission starts {e.start_time}, expected setup + delay")
        if e.volume <= 0:
            report.append(f"{tag}: non-positive volume")
        elif not _close(e.end_time - e.start_time, e.volume / cfg.core_rates[e.core], e.end_time):
            report.append(f"{tag}: duration does not match volume / rate")
        by_port.setdefault((e.core, "in", e.ingress), []).append((e.setup_time, e.end_time, q))
        by_port.setdefault((e.core, "out", e.egress), []).append((e.setup_time, e.end_time, q))
        key = (e.coflow, e.core, e.ingress, e.egress)
        sent[key] = sent.get(key, 0.0) + e.volume
        counts[key] = counts.get(key, 0) + 1

    for (k, side, p), spans in by_port.items():
        spans.sort()
        for (s0, e0, q0), (s1, e1, q1) in zip(spans, spans[1:]):
            if s1 < e0 - 1e-9 * max(1.0, e0):
                report.append(f"port conflict on core {k} {side}gress {p}: events {q0} and {q1} overlap")

    if allocation is not None:
        expected = {}
        for m in range(M):
            for k in range(K):
                for (i, j), v in allocation.parts[m][k].items():
                    expected[(m, k, i, j)] = v
    else:
        expected = None
    if expected is not None:
        for key in sorted(set(expected) | set(sent)):
            want, got = expected.get(key, 0.0), sent.get(key, 0.0)
            if not _close(want, got, want):
                report.append(f"volume mismatch for coflow {key[0]} core {key[1]} ({key[2]},{key[3]}): "
                              f"allocated {want}, sent {got}")
            elif model == NOT_ALL_STOP and counts.get(key, 0) != 1:
                report.append(f"subflow coflow {key[0]} core {key[1]} ({key[2]},{key[3]}) "
                              f"served by {counts.get(key, 0)} circuits")
    else:
        totals = {}
        for (m, _, i, j), v in sent.items():
            totals[(m, i, j)] = totals.get((m, i, j), 0.0) + v
        for m, c in enumerate(instance.coflows):
            for i, j, v in c.flows():
                got = totals.pop((m, i, j), 0.0)
                if not _close(v, got, v):
                    report.append(f"volume mismatch for coflow {m} ({i},{j}): demand {v}, sent {got}")
        for (m, i, j), v in totals.items():
            report.append(f"coflow {m} sent {v} on ({i},{j}) with no demand")

    last_end = {}
    for e in result.events:
        last_end[e.coflow] = max(last_end.get(e.coflow, -np.inf), e.end_time)
    if len(result.completion) != M:
        report.append("completion vector has the wrong length")
    else:
        for m, c in enumerate(instance.coflows):
            want = last_end.get(m, c.release)
            if not _close(result.completion[m], want, want):
                report.append(f"coflow {m}: completion {result.completion[m]} but last circuit ends at {want}")
        obj = float(instance.weights @ np.asarray(result.completion)) if M else 0.0
        if not _close(result.objective, obj, obj):
            report.append(f"objective {result.objective} differs from weighted completions {obj}")

    if model == ALL_STOP:
        report += _check_segments(result, delay)
    return report


def _check_segments(result: ScheduleResult, delay: float) -> list[str]:
    report = []
    per_core: dict[int, list[tuple[float, float]]] = {}
    for k, _, begin, end in result.segments:
        if end - begin < delay - 1e-9 * max(1.0, end):
            report.append(f"core {k}: configuration segment [{begin}, {end}) shorter than the delay")
        per_core.setdefault(k, []).append((begin, end))
    for k, segs in per_core.items():
        segs.sort()
        for (b0, e0), (b1, _) in zip(segs, segs[1:]):
            if b1 < e0 - 1e-9 * max(1.0, e0):
                report.append(f"core {k}: configuration segments overlap at {b1}")
    # every event must open with a segment on its core and end inside it
    starts = {}
    for k, _, b, end in result.segments:
        starts.setdefault(k, []).append((b, end))
    for k in starts:
        starts[k].sort()
    for q, e in enumerate(result.events):
        segs = starts.get(e.core, [])
        pos = bisect.bisect_left(segs, (e.setup_time - 1e-9 * max(1.0, abs(e.setup_time)), -np.inf))
        ok = False
        for b, end in segs[pos:pos + 2]:
            tol = 1e-9 * max(1.0, abs(end))
            if abs(b - e.setup_time) <= tol and e.end_time <= end + tol:
                ok = True
                break
        if not ok:
            report.append(f"event {q}: not aligned with a configuration segment on core {e.core}")
    return report


def work_conservation_violations(result: ScheduleResult, instance: Instance) -> list[str]:
    """Decision points at which a released, unstarted subflow had both ports idle."""
    out = []
    points = sorted({0.0} | {c.release for c in instance.coflows} | {e.end_time for e in result.events})
    by_core: dict[int, list[CircuitEvent]] = {}
    for e in result.events:
        by_core.setdefault(e.core, []).append(e)
    for k, evs in by_core.items():
        for t in points:
            busy_in = {e.ingress for e in evs if e.setup_time <= t < e.end_time}
            busy_out = {e.egress for e in evs if e.setup_time <= t < e.end_time}
            for e in evs:
                if e.setup_time > t and instance.coflows[e.coflow].release <= t:
                    if e.ingress not in busy_in and e.egress not in busy_out:
                        out.append(f"core {k} t={t}: subflow of coflow {e.coflow} "
                                   f"({e.ingress},{e.egress}) left waiting on idle ports")
    return out


# --------------------------------------------------------------------------- event log

def schedule_to_json(result: ScheduleResult, instance: Instance | None = None) -> str:
    doc = {
        "format": "kcore-ocs-schedule",
        "version": EVENT_LOG_VERSION,
        "model": result.model,
        "objective": result.objective,
        "completion": [float(t) for t in result.completion],
        "events": [asdict(e) for e in result.events],
        "segments": [{"core": k, "coflow": m, "begin": b, "end": e} for k, m, b, e in result.segments],
    }
    if instance is not None:
        doc["coflow_ids"] = instance.ids
    return json.dumps(doc, sort_keys=True, indent=1)


def schedule_from_json(text: str) -> ScheduleResult:
    doc = json.loads(text)
    if doc.get("format") != "kcore-ocs-schedule":
        raise ValueError("not a kcore-ocs schedule log")
    events = [CircuitEvent(**e) for e in doc["events"]]
    per_core: dict[tuple[int, int], float] = {}
    for e in events:
        key = (e.coflow, e.core)
        per_core[key] = max(per_core.get(key, e.end_time), e.end_time)
    segments = [(s["core"], s["coflow"], s["begin"], s["end"]) for s in doc.get("segments", [])]
    return ScheduleResult(events, per_core, np.array(doc["completion"], dtype=float),
                          float(doc["objective"]), doc["model"], segments)
