"""Problem types: network configuration, coflows and instances."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np


class SwitchMode(str, enum.Enum):
    OCS = "ocs"
    EPS = "eps"


class InvalidInstanceError(ValueError):
    """Raised by entry points that refuse an instance failing validation."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(report.violations))


@dataclass(frozen=True)
class NetworkConfig:
    """K parallel N-port cores with per-port rates and a circuit setup delay."""

    num_ports: int
    core_rates: tuple[float, ...]
    reconfig_delay: float = 0.0
    mode: SwitchMode = SwitchMode.OCS

    def __post_init__(self):
        object.__setattr__(self, "core_rates", tuple(float(r) for r in self.core_rates))
        object.__setattr__(self, "reconfig_delay", float(self.reconfig_delay))
        object.__setattr__(self, "mode", SwitchMode(self.mode))

    @property
    def num_cores(self) -> int:
        return len(self.core_rates)

    @property
    def total_rate(self) -> float:
        return float(sum(self.core_rates))

    @property
    def max_rate(self) -> float:
        return max(self.core_rates)

    @property
    def delay(self) -> float:
        """Delay actually charged per circuit setup (always 0 for EPS)."""
        return 0.0 if self.mode is SwitchMode.EPS else self.reconfig_delay

    def with_mode(self, mode: SwitchMode | str) -> "NetworkConfig":
        mode = SwitchMode(mode)
        delay = 0.0 if mode is SwitchMode.EPS else self.reconfig_delay
        return NetworkConfig(self.num_ports, self.core_rates, delay, mode)


def _frozen_matrix(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Coflow:
    id: Hashable
    demand: np.ndarray
    weight: float = 1.0
    release: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "demand", _frozen_matrix(self.demand))
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "release", float(self.release))

    def flows(self) -> list[tuple[int, int, float]]:
        """Nonzero entries as (ingress, egress, volume), row-major."""
        rows, cols = np.nonzero(self.demand > 0)
        return [(int(i), int(j), float(self.demand[i, j])) for i, j in zip(rows, cols)]

    @property
    def is_empty(self) -> bool:
        return not np.any(self.demand > 0)


@dataclass(frozen=True, eq=False)
class Instance:
    config: NetworkConfig
    coflows: tuple[Coflow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coflows", tuple(self.coflows))

    @property
    def num_coflows(self) -> int:
        return len(self.coflows)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.coflows], dtype=float)

    @property
    def releases(self) -> np.ndarray:
        return np.array([c.release for c in self.coflows], dtype=float)

    @property
    def ids(self) -> list:
        return [c.id for c in self.coflows]

    def with_config(self, config: NetworkConfig) -> "Instance":
        return Instance(config, self.coflows)

    def with_mode(self, mode: SwitchMode | str) -> "Instance":
        return Instance(self.config.with_mode(mode), self.coflows)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _config_violations(config: NetworkConfig) -> list[str]:
    out = []
    if not isinstance(config.num_ports, (int, np.integer)) or config.num_ports < 1:
        out.append(f"config.num_ports: must be a positive integer, got {config.num_ports!r}")
    if len(config.core_rates) < 1:
        out.append("config.core_rates: at least one core is required")
    for k, r in enumerate(config.core_rates):
        if not np.isfinite(r) or r <= 0:
            out.append(f"config.core_rates[{k}]: rate must be positive, got {r!r}")
    if not np.isfinite(config.reconfig_delay) or config.reconfig_delay < 0:
        out.append(f"config.reconfig_delay: must be non-negative, got {config.reconfig_delay!r}")
    if config.mode is SwitchMode.EPS and config.reconfig_delay != 0:
        out.append("config.reconfig_delay: EPS mode requires zero reconfiguration delay")
    return out


def validate_instance(instance: Instance) -> ValidationReport:
    """Collect every violated invariant; never raises."""
    report = ValidationReport(_config_violations(instance.config))
    n = instance.config.num_ports
    seen = set()
    for c in instance.coflows:
        tag = f"coflow {c.id!r}"
        if c.id in seen:
            report.violations.append(f"{tag}: duplicate id")
        seen.add(c.id)
        d = c.demand
        if d.ndim != 2 or d.shape != (n, n):
            report.violations.append(f"{tag}.demand: dimension mismatch, expected {(n, n)}, got {d.shape}")
        elif not np.all(np.isfinite(d)):
            report.violations.append(f"{tag}.demand: non-finite entry")
        else:
            for i, j in zip(*np.nonzero(d < 0)):
                report.violations.append(f"{tag}.demand: negative demand at ({i},{j})")
        if not np.isfinite(c.weight) or c.weight <= 0:
            report.violations.append(f"{tag}.weight: must be positive, got {c.weight!r}")
        if not np.isfinite(c.release) or c.release < 0:
            report.violations.append(f"{tag}.release: must be non-negative, got {c.release!r}")
    return report


def require_valid(instance: Instance) -> Instance:
    report = validate_instance(instance)
    if not report.ok:
        raise InvalidInstanceError(report)
    return instance


def make_instance(
    demands: Sequence,
    rates: Sequence[float],
    delay: float = 0.0,
    weights: Sequence[float] | None = None,
    releases: Sequence[float] | None = None,
    mode: SwitchMode | str = SwitchMode.OCS,
) -> Instance:
    """Convenience constructor; coflow ids are 0..M-1."""
    demands = [np.asarray(d, dtype=float) for d in demands]
    n = demands[0].shape[0] if demands else 1
    m = len(demands)
    weights = [1.0] * m if weights is None else weights
    releases = [0.0] * m if releases is None else releases
    config = NetworkConfig(n, tuple(rates), delay, SwitchMode(mode))
    coflows = [Coflow(idx, d, w, a) for idx, (d, w, a) in enumerate(zip(demands, weights, releases))]
    return Instance(config, tuple(coflows))
