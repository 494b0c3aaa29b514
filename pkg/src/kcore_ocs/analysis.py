"""Per-instance audit of the prefix inequalities behind the approximation bound.

All checks run in LP order. Quantities for a prefix of the first m coflows:

* load   rho_{1:m}  = max port load of the aggregated prefix demand
* count  tau_{1:m}  = max over ports of the summed per-coflow nonzero counts
* core   max_k lb(D^k_{1:m}) from the greedy allocation
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allocation import Allocation, prefix_core_matrices
from .bounds import port_stats, single_core_lb
from .circuit_sim import ScheduleResult
from .lp_relax import LpSolution
from .model import Instance, SwitchMode

REL_TOL = 1e-9


def _leq(a: float, b: float, tol: float = REL_TOL) -> bool:
    return a <= b + tol * max(1.0, abs(a), abs(b))


@dataclass
class PrefixAudit:
    """Breaches per inequality; each entry is (rank, lhs, rhs)."""

    transmission: list = field(default_factory=list)
    reconfiguration: list = field(default_factory=list)
    allocation: list = field(default_factory=list)
    scheduling: list = field(default_factory=list)
    ratio_bound: float = float("nan")
    objective: float = float("nan")
    lp_bound: float = float("nan")

    @property
    def theorem_ok(self) -> bool:
        if self.lp_bound <= 0:
            return self.objective <= 1e-9
        return self.objective <= self.ratio_bound * self.lp_bound * (1 + 1e-6)

    @property
    def hard_ok(self) -> bool:
        """Everything except the scheduling-phase inequality, which is only logged."""
        return not (self.transmission or self.reconfiguration or self.allocation) and self.theorem_ok


def theorem_factor(instance: Instance) -> float:
    """(8K+1) in OCS, (4H+1) in EPS; one less when every release is zero."""
    K = instance.config.num_cores
    base = 8 * K if instance.config.mode == SwitchMode.OCS else 4 * K
    zero_release = instance.num_coflows == 0 or not np.any(instance.releases > 0)
    return float(base if zero_release else base + 1)


def audit(instance: Instance, solution: LpSolution, allocation: Allocation,
          result: ScheduleResult) -> PrefixAudit:
    cfg = instance.config
    N, K = cfg.num_ports, cfg.num_cores
    R, delay = cfg.total_rate, cfg.delay
    ocs = cfg.mode == SwitchMode.OCS
    T = np.asarray(solution.completion_values, dtype=float)
    out = PrefixAudit(ratio_bound=theorem_factor(instance), objective=result.objective,
                      lp_bound=float(solution.objective))
    load = np.zeros(2 * N)
    count = np.zeros(2 * N)
    agg = np.zeros((N, N))
    core_prefix = prefix_core_matrices(instance, allocation)
    for rank, m in enumerate(allocation.order):
        d = instance.coflows[m].demand
        stats = port_stats(d)
        load += stats.load
        count += stats.count
        agg += d
        rho, tau = load.max(initial=0.0), count.max(initial=0.0)
        t_lp = T[m]
        if not _leq(rho, 2 * R * t_lp):
            out.transmission.append((rank, rho, 2 * R * t_lp))
        if ocs and delay > 0 and not _leq(tau, 2 * K / delay * t_lp):
            out.reconfiguration.append((rank, tau, 2 * K / delay * t_lp))
        core_lb = max(single_core_lb(mat, r, delay) for mat, r in zip(core_prefix[rank], cfg.core_rates))
        agg_stats = port_stats(agg)
        rhs4 = agg_stats.max_load / cfg.max_rate + (agg_stats.max_count * delay if ocs else 0.0)
        if not _leq(core_lb, rhs4):
            out.allocation.append((rank, core_lb, rhs4))
        c = instance.coflows[m]
        rhs5 = c.release + 2 * core_lb
        if not _leq(result.completion[m], rhs5):
            out.scheduling.append((rank, float(result.completion[m]), rhs5))
    return out
