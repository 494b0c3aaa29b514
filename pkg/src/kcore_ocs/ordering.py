"""Global coflow priority orders."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import global_single_coflow_lb
from .lp_relax import LpSolution, LpStatus
from .model import Instance, require_valid


@dataclass(frozen=True)
class CoflowOrder:
    """``indices[rank]`` is the input position of the coflow with that rank."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if sorted(idx) != list(range(len(idx))):
            raise ValueError(f"not a permutation: {idx}")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def ranks(self) -> list[int]:
        """rank of each input position."""
        out = [0] * len(self.indices)
        for r, m in enumerate(self.indices):
            out[m] = r
        return out

    def ids(self, instance: Instance) -> list:
        return [instance.coflows[m].id for m in self.indices]

    @classmethod
    def identity(cls, m: int) -> "CoflowOrder":
        return cls(tuple(range(m)))


def lp_guided_order(instance: Instance, solution: LpSolution) -> CoflowOrder:
    """Non-decreasing LP completion value, ties by input position."""
    if solution.status is not LpStatus.OPTIMAL:
        raise ValueError(f"LP solution is {solution.status.value}")
    T = np.asarray(solution.completion_values, dtype=float)
    if T.shape != (instance.num_coflows,):
        raise ValueError(f"dimension mismatch: {T.shape[0]} LP values for {instance.num_coflows} coflows")
    return CoflowOrder(tuple(int(m) for m in np.argsort(T, kind="stable")))


def wspt_score(instance: Instance, m: int) -> float:
    c = instance.coflows[m]
    lb = global_single_coflow_lb(c.demand, instance.config)
    return float("inf") if lb == 0 else c.weight / lb


def wspt_order(instance: Instance) -> CoflowOrder:
    """Non-increasing weight / single-coflow bound; empty coflows first."""
    require_valid(instance)
    scores = [wspt_score(instance, m) for m in range(instance.num_coflows)]
    return CoflowOrder(tuple(sorted(range(len(scores)), key=lambda m: (-scores[m], m))))
