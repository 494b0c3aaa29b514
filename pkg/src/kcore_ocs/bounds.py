"""Port statistics, per-core and global completion-time lower bounds.

Port indexing is fixed everywhere: 0..N-1 are ingress ports, N..2N-1 egress.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkConfig, SwitchMode


@dataclass(frozen=True)
class PortStats:
    load: np.ndarray    # length 2N
    count: np.ndarray   # length 2N, int

    @property
    def num_ports(self) -> int:
        return self.load.shape[0] // 2

    @property
    def max_load(self) -> float:
        return float(self.load.max()) if self.load.size else 0.0

    @property
    def max_count(self) -> int:
        return int(self.count.max()) if self.count.size else 0


def port_stats(demand) -> PortStats:
    d = np.asarray(demand, dtype=float)
    nz = d > 0
    load = np.concatenate([d.sum(axis=1), d.sum(axis=0)])
    count = np.concatenate([nz.sum(axis=1), nz.sum(axis=0)]).astype(np.int64)
    return PortStats(load, count)


def lb_from_stats(stats: PortStats, rate: float, delay: float) -> float:
    if not np.any(stats.count):
        return 0.0
    return float(np.max(stats.load / rate + stats.count * delay))


def single_core_lb(demand, rate: float, delay: float) -> float:
    """max over ports of load/rate + nonzero-count*delay; 0 for the zero matrix."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return lb_from_stats(port_stats(demand), rate, delay)


def global_single_coflow_lb(demand, config: NetworkConfig) -> float:
    stats = port_stats(demand)
    if not np.any(stats.count):
        return 0.0
    base = stats.max_load / config.total_rate
    if config.mode is SwitchMode.EPS:
        return base
    return config.reconfig_delay + base


class PrefixState:
    """Per-core prefix-aggregated demand with incrementally maintained port stats.

    Also tracks, per core, the running maxima of load/rate + count*delay and of
    load/rate. Entries only ever grow, so a stored max is never invalidated.
    """

    def __init__(self, num_ports: int, rates, delay: float):
        self.num_ports = num_ports
        self.rates = np.asarray(rates, dtype=float)
        self.delay = float(delay)
        k = len(self.rates)
        self.matrices = [np.zeros((num_ports, num_ports)) for _ in range(k)]
        self.loads = np.zeros((k, 2 * num_ports))
        self.counts = np.zeros((k, 2 * num_ports), dtype=np.int64)
        self._lb = np.zeros(k)
        self._load_term = np.zeros(k)

    @classmethod
    def for_config(cls, config: NetworkConfig) -> "PrefixState":
        return cls(config.num_ports, config.core_rates, config.delay)

    @property
    def num_cores(self) -> int:
        return len(self.rates)

    def stats(self, core: int) -> PortStats:
        return PortStats(self.loads[core].copy(), self.counts[core].copy())

    def lb(self, core: int) -> float:
        return float(self._lb[core])

    def _check(self, core: int, i: int, j: int):
        n = self.num_ports
        if not (0 <= core < self.num_cores and 0 <= i < n and 0 <= j < n):
            raise IndexError(f"index out of range: core={core}, i={i}, j={j}")

    def _touched(self, core: int, i: int, j: int, d: float):
        q = self.num_ports + j
        fresh = self.matrices[core][i, j] == 0
        li, lq = self.loads[core, i] + d, self.loads[core, q] + d
        ci, cq = self.counts[core, i] + fresh, self.counts[core, q] + fresh
        return li, lq, ci, cq

    def tentative_lb(self, core: int, i: int, j: int, d: float) -> float:
        """Single-core bound of this core if d were added at (i, j). O(1)."""
        li, lq, ci, cq = self._touched(core, i, j, d)
        r = self.rates[core]
        return max(self._lb[core], li / r + ci * self.delay, lq / r + cq * self.delay)

    def tentative_load_term(self, core: int, i: int, j: int, d: float) -> float:
        li, lq, _, _ = self._touched(core, i, j, d)
        r = self.rates[core]
        return max(self._load_term[core], li / r, lq / r)

    def add(self, core: int, i: int, j: int, d: float) -> "PrefixState":
        if not d > 0:
            raise ValueError("added volume must be positive")
        self._check(core, i, j)
        self._lb[core] = self.tentative_lb(core, i, j, d)
        self._load_term[core] = self.tentative_load_term(core, i, j, d)
        q = self.num_ports + j
        if self.matrices[core][i, j] == 0:
            self.counts[core, i] += 1
            self.counts[core, q] += 1
        self.loads[core, i] += d
        self.loads[core, q] += d
        self.matrices[core][i, j] += d
        return self


def prefix_add(state: PrefixState, core: int, i: int, j: int, d: float) -> PrefixState:
    return state.add(core, i, j, d)
