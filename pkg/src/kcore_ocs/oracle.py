"""Exhaustive search over tiny instances, used to bracket the optimum in tests.

Every flow -> core assignment is paired with every subflow priority order and
dispatched by the same non-delay simulator the main algorithm uses. The best
value found is an upper bound on the true optimum: a schedule that idles on
purpose is never generated.

Cores are independent once the assignment is fixed, so priority orders are
enumerated per core, completion vectors are Pareto-pruned, and cores are then
combined. The logical search space is still K^F * (permutations per core).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .allocation import Allocation
from .circuit_sim import ScheduleResult, _finish, dispatch_core
from .model import Instance, require_valid
from .ordering import CoflowOrder

MAX_FLOWS = 6
MAX_CORES = 2
MAX_COFLOWS = 3


class OracleLimitError(ValueError):
    pass


@dataclass
class OracleResult:
    objective: float
    assignment: dict            # (m, i, j) -> core
    priorities: tuple           # per core, subflows (m, i, j) in dispatch priority
    explored: int               # (assignment, order) pairs covered
    schedule: ScheduleResult
    allocation: Allocation


def _pareto(vectors: dict) -> dict:
    """Keep completion vectors not dominated by another (keys are vectors)."""
    items = sorted(vectors.items(), key=lambda kv: sum(kv[0]))
    kept = {}
    for vec, perm in items:
        if any(all(o <= v for o, v in zip(other, vec)) for other in kept):
            continue
        kept[vec] = perm
    return kept


def brute_force_best(instance: Instance, max_flows: int = MAX_FLOWS, max_cores: int = MAX_CORES,
                     max_coflows: int = MAX_COFLOWS) -> OracleResult:
    require_valid(instance)
    cfg = instance.config
    flows = [(m, i, j, v) for m, c in enumerate(instance.coflows) for i, j, v in c.flows()]
    F, K, M = len(flows), cfg.num_cores, instance.num_coflows
    if F > max_flows or K > max_cores or M > max_coflows:
        raise OracleLimitError(f"instance has F={F}, K={K}, M={M}; limits are "
                               f"F<={max_flows}, K<={max_cores}, M<={max_coflows}")
    releases = [c.release for c in instance.coflows]
    weights = instance.weights
    base = np.array(releases, dtype=float)
    cache: dict = {}

    def core_options(k, members):
        """Pareto set of per-coflow completion vectors for one core's subflow set."""
        key = (k, members)
        if key not in cache:
            options = {}
            for perm in itertools.permutations(members):
                jobs = [(flows[q][0], flows[q][1], flows[q][2], flows[q][3]) for q in perm]
                evs = dispatch_core(jobs, cfg.core_rates[k], cfg.delay, releases, cfg.num_ports, core=k)
                vec = [-math.inf] * M
                for e in evs:
                    vec[e.coflow] = max(vec[e.coflow], e.end_time)
                options.setdefault(tuple(vec), perm)
            cache[key] = _pareto(options)
        return cache[key]

    best = (math.inf, None, None)
    explored = 0
    for assign in itertools.product(range(K), repeat=F):
        members = [tuple(q for q in range(F) if assign[q] == k) for k in range(K)]
        explored += math.prod(math.factorial(len(g)) for g in members)
        per_core = [core_options(k, members[k]) for k in range(K)]
        for combo in itertools.product(*(list(p.items()) for p in per_core)):
            comp = base.copy()
            for vec, _ in combo:
                comp = np.maximum(comp, vec)
            obj = float(weights @ comp) if M else 0.0
            if obj < best[0] - 1e-12 * max(1.0, abs(obj)):
                best = (obj, assign, tuple(perm for _, perm in combo))
        if F == 0:
            break

    obj, assign, perms = best
    if assign is None:  # no flows at all
        assign, perms = (), tuple(() for _ in range(K))
        obj = float(weights @ base) if M else 0.0
    # rebuild the witness schedule
    events = []
    parts = [tuple({} for _ in range(K)) for _ in range(M)]
    for k, perm in enumerate(perms):
        jobs = [flows[q] for q in perm]
        events += dispatch_core(jobs, cfg.core_rates[k], cfg.delay, releases, cfg.num_ports, core=k)
        for q in perm:
            m, i, j, v = flows[q]
            parts[m][k][(i, j)] = v
    flow_order = tuple(tuple((i, j) for i, j, _ in c.flows()) for c in instance.coflows)
    allocation = Allocation(tuple(parts), flow_order, CoflowOrder.identity(M), K)
    schedule = _finish(events, [], instance.coflows, "not-all-stop")
    return OracleResult(
        objective=obj,
        assignment={flows[q][:3]: assign[q] for q in range(F)},
        priorities=tuple(tuple(flows[q][:3] for q in perm) for perm in perms),
        explored=explored,
        schedule=schedule,
        allocation=allocation,
    )
