"""Inter-core flow allocation: prefix-aware greedy and the load-only ablation.

Each flow goes whole to one core. Coflows are visited in priority order, flows
within a coflow by non-increasing volume (ties by (i, j)), and each flow picks
the core whose prefix bound after the tentative add is smallest (ties: lowest
core index).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import PrefixState
from .model import Instance, require_valid
from .ordering import CoflowOrder

VOLUME_DESCENDING = "volume-descending"
LEXICOGRAPHIC = "lexicographic"


@dataclass(frozen=True)
class Allocation:
    """parts[m][k] maps (i, j) -> volume of coflow m (input position) on core k."""

    parts: tuple[tuple[dict, ...], ...]
    flow_order: tuple[tuple[tuple[int, int], ...], ...]
    order: CoflowOrder
    num_cores: int

    def core_matrix(self, m: int, k: int, num_ports: int) -> np.ndarray:
        out = np.zeros((num_ports, num_ports))
        for (i, j), v in self.parts[m][k].items():
            out[i, j] = v
        return out

    def core_of(self, m: int, i: int, j: int) -> int | None:
        for k, part in enumerate(self.parts[m]):
            if (i, j) in part:
                return k
        return None

    def subflows(self, k: int):
        """Subflows on core k in dispatch priority: (m, i, j, volume)."""
        out = []
        for m in self.order:
            part = self.parts[m][k]
            for i, j in self.flow_order[m]:
                if (i, j) in part:
                    out.append((m, i, j, part[(i, j)]))
        return out


def sorted_flows(demand: np.ndarray, policy: str = VOLUME_DESCENDING) -> list[tuple[int, int, float]]:
    rows, cols = np.nonzero(demand > 0)
    flows = [(int(i), int(j), float(demand[i, j])) for i, j in zip(rows, cols)]
    if policy == VOLUME_DESCENDING:
        flows.sort(key=lambda f: (-f[2], f[0], f[1]))
    elif policy != LEXICOGRAPHIC:
        raise ValueError(f"unknown flow order policy {policy!r}")
    return flows


def _allocate(instance: Instance, order: CoflowOrder, criterion: str, flow_policy: str) -> Allocation:
    require_valid(instance)
    if len(order) != instance.num_coflows:
        raise ValueError("order does not match instance")
    cfg = instance.config
    K = cfg.num_cores
    state = PrefixState.for_config(cfg)
    parts = [None] * instance.num_coflows
    flow_order = [None] * instance.num_coflows
    score = state.tentative_lb if criterion == "lb" else state.tentative_load_term
    for m in order:
        flows = sorted_flows(instance.coflows[m].demand, flow_policy)
        mine = tuple({} for _ in range(K))
        for i, j, d in flows:
            best_k, best = 0, score(0, i, j, d)
            for k in range(1, K):
                s = score(k, i, j, d)
                if s < best:
                    best_k, best = k, s
            state.add(best_k, i, j, d)
            mine[best_k][(i, j)] = d
        parts[m] = mine
        flow_order[m] = tuple((i, j) for i, j, _ in flows)
    return Allocation(tuple(parts), tuple(flow_order), order, K)


def greedy_allocate(instance: Instance, order: CoflowOrder,
                    flow_policy: str = VOLUME_DESCENDING) -> Allocation:
    return _allocate(instance, order, "lb", flow_policy)


def load_only_allocate(instance: Instance, order: CoflowOrder,
                       flow_policy: str = VOLUME_DESCENDING) -> Allocation:
    """Same pass but the core choice ignores the reconfiguration term."""
    return _allocate(instance, order, "load", flow_policy)


def prefix_core_matrices(instance: Instance, allocation: Allocation) -> list[list[np.ndarray]]:
    """Per-core prefix-aggregated matrices after each rank (rank-major)."""
    N, K = instance.config.num_ports, allocation.num_cores
    acc = [np.zeros((N, N)) for _ in range(K)]
    out = []
    for m in allocation.order:
        for k in range(K):
            for (i, j), v in allocation.parts[m][k].items():
                acc[k][i, j] += v
        out.append([a.copy() for a in acc])
    return out
