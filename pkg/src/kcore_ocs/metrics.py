"""Evaluation quantities and record serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

CSV_COLUMNS = (
    "scheme", "K", "N", "M", "delay", "rates", "seed", "release_policy", "mode", "sweep_value",
    "total_weighted_cct", "normalized_weighted_cct", "p95_cct", "p99_cct", "approx_ratio",
    "lp_bound", "status", "error",
)


@dataclass
class ExperimentRecord:
    scheme: str
    K: int
    N: int
    M: int
    delay: float
    rates: tuple[float, ...]
    seed: int | None
    release_policy: str
    total_weighted_cct: float
    normalized_weighted_cct: float | None = None
    p95_cct: float | None = None
    p99_cct: float | None = None
    approx_ratio: float | None = None     # OURS only
    lp_bound: float | None = None
    runtime_seconds: float | None = None
    mode: str = "ocs"
    sweep_value: object = None
    status: str = "ok"
    error: str = ""
    extra: dict = field(default_factory=dict)

    def as_row(self, with_runtime: bool = False) -> dict:
        row = {k: getattr(self, k) for k in CSV_COLUMNS}
        row["rates"] = " ".join(repr(float(r)) for r in self.rates)
        if with_runtime:
            row["runtime_seconds"] = self.runtime_seconds
        return row


def total_weighted_cct(completion, weights) -> float:
    t = np.asarray(completion, dtype=float)
    w = np.asarray(weights, dtype=float)
    if t.shape != w.shape:
        raise ValueError(f"{t.size} completion times for {w.size} weights")
    return float(w @ t) if t.size else 0.0


def normalized_weighted_cct(candidate: float, reference: float) -> float:
    if reference <= 0:
        raise ZeroDivisionError("reference objective must be positive")
    return candidate / reference


def percentile_cct(completions, q: float) -> float:
    """Nearest-rank percentile: the ceil(q/100 * M)-th smallest value."""
    values = np.sort(np.asarray(completions, dtype=float))
    if values.size == 0:
        raise ValueError("no completion times")
    if not 0 < q <= 100:
        raise ValueError("q must be in (0, 100]")
    rank = max(1, math.ceil(q / 100.0 * values.size - 1e-12))
    return float(values[rank - 1])


def approx_ratio(objective: float, lower_bound: float) -> float:
    if lower_bound <= 0:
        if objective == 0:
            return 1.0
        raise ZeroDivisionError("zero lower bound with positive objective")
    return objective / lower_bound


def records_to_csv(records, with_runtime: bool = False) -> str:
    cols = list(CSV_COLUMNS) + (["runtime_seconds"] if with_runtime else [])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in records:
        row = r.as_row(with_runtime)
        writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in row.items()})
    return buf.getvalue()


def record_to_json(record: ExperimentRecord, with_runtime: bool = False) -> str:
    doc = asdict(record)
    doc["rates"] = list(record.rates)
    if not with_runtime:
        doc.pop("runtime_seconds")
    return json.dumps(doc, sort_keys=True)


def records_to_jsonl(records, with_runtime: bool = False) -> str:
    return "".join(record_to_json(r, with_runtime) + "\n" for r in records)
