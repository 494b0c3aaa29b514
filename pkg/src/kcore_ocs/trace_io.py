"""Instance files, Facebook-benchmark trace ingestion, sampling and synthetic generators.

Canonical instance document (JSON, keys sorted, one coflow per line, floats
in shortest round-trip form so write(parse(text)) == text byte for byte)::

    {"coflows": [
     {"flows": [[i, j, volume], ...], "id": 0, "release": 0.0, "weight": 1.0},
     ...
    ], "format": "kcore-ocs-instance", "network": {"delay": 8.0, "mode": "ocs", "ports": 10, "rates": [10.0, 20.0, 30.0]}, "version": 1}

Ports are 0-based in the file. Flows are listed row-major.

Trace text (coflow-benchmark layout)::

    <num_machines> <num_coflows>
    <id> <arrival_ms> <num_mappers> <m_1> ... <num_reducers> <r_1>:<MB> ...
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import jsonschema
import numpy as np

from .model import Coflow, Instance, NetworkConfig, SwitchMode, require_valid

FORMAT_TAG = "kcore-ocs-instance"
FORMAT_VERSION = 1
PERTURBATION = (0.8, 1.2)


class TraceFormatError(ValueError):
    pass


INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "network", "coflows"],
    "additionalProperties": False,
    "properties": {
        "format": {"const": FORMAT_TAG},
        "version": {"const": FORMAT_VERSION},
        "network": {
            "type": "object",
            "required": ["ports", "rates", "delay", "mode"],
            "additionalProperties": False,
            "properties": {
                "ports": {"type": "integer", "minimum": 1},
                "rates": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
                "delay": {"type": "number", "minimum": 0},
                "mode": {"enum": [m.value for m in SwitchMode]},
            },
        },
        "coflows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "weight", "release", "flows"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": ["integer", "string"]},
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                    "release": {"type": "number", "minimum": 0},
                    "flows": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "prefixItems": [{"type": "integer", "minimum": 0},
                                            {"type": "integer", "minimum": 0},
                                            {"type": "number", "exclusiveMinimum": 0}],
                            "minItems": 3,
                            "maxItems": 3,
                        },
                    },
                },
            },
        },
    },
}


# --------------------------------------------------------------------------- canonical file

def _num(x: float) -> float:
    return float(x)


def instance_to_document(instance: Instance) -> dict:
    cfg = instance.config
    return {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "network": {
            "ports": cfg.num_ports,
            "rates": [_num(r) for r in cfg.core_rates],
            "delay": _num(cfg.reconfig_delay),
            "mode": SwitchMode(cfg.mode).value,
        },
        "coflows": [
            {
                "id": c.id if isinstance(c.id, (int, str)) else str(c.id),
                "weight": _num(c.weight),
                "release": _num(c.release),
                "flows": [[i, j, _num(v)] for i, j, v in c.flows()],
            }
            for c in instance.coflows
        ],
    }


def write_canonical(instance: Instance) -> str:
    # one coflow per line; keys are sorted so "coflows" leads
    doc = instance_to_document(instance)
    coflows = [json.dumps(c, sort_keys=True) for c in doc.pop("coflows")]
    rest = json.dumps(doc, sort_keys=True)[1:]
    body = ",\n ".join(coflows)
    return '{"coflows": [\n ' + body + '\n], ' + rest + "\n" if coflows else '{"coflows": [], ' + rest + "\n"


def _field_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def parse_canonical(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    errors = sorted(jsonschema.Draft202012Validator(INSTANCE_SCHEMA).iter_errors(doc),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = [f"{_field_path(e)}: {e.message}" for e in errors]
        raise TraceFormatError("schema violation\n  " + "\n  ".join(lines))
    net = doc["network"]
    n = net["ports"]
    cfg = NetworkConfig(n, tuple(float(r) for r in net["rates"]), float(net["delay"]), SwitchMode(net["mode"]))
    coflows = []
    for q, c in enumerate(doc["coflows"]):
        d = np.zeros((n, n))
        for i, j, v in c["flows"]:
            if i >= n or j >= n:
                raise TraceFormatError(f"coflows/{q}/flows: port pair ({i},{j}) outside {n} ports")
            if d[i, j] != 0:
                raise TraceFormatError(f"coflows/{q}/flows: duplicate entry ({i},{j})")
            d[i, j] = float(v)
        coflows.append(Coflow(c["id"], d, float(c["weight"]), float(c["release"])))
    return require_valid(Instance(cfg, tuple(coflows)))


def load_instance(path) -> Instance:
    with open(path) as fh:
        return parse_canonical(fh.read())


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_canonical(instance))


# --------------------------------------------------------------------------- trace

@dataclass(frozen=True)
class RawCoflowRecord:
    id: int
    arrival_time: float                          # milliseconds
    senders: tuple[int, ...]
    receivers: tuple[tuple[int, float], ...]     # (machine, MB received)

    @property
    def total_volume(self) -> float:
        return sum(v for _, v in self.receivers)

    @property
    def num_flows(self) -> int:
        return len(self.senders) * len(self.receivers)


def _parse_record(tokens: list[str], lineno: int) -> RawCoflowRecord:
    def bad(msg):
        return TraceFormatError(f"line {lineno}: {msg}")

    try:
        cid, arrival, n_map = int(tokens[0]), float(tokens[1]), int(tokens[2])
        senders = tuple(int(t) for t in tokens[3:3 + n_map])
        if len(senders) != n_map:
            raise bad(f"expected {n_map} mappers")
        pos = 3 + n_map
        n_red = int(tokens[pos])
        red_tokens = tokens[pos + 1:]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, TraceFormatError):
            raise
        raise bad(f"cannot parse coflow header fields ({exc})") from None
    if len(red_tokens) != n_red:
        raise bad(f"expected {n_red} reducer entries, found {len(red_tokens)}")
    receivers = []
    for tok in red_tokens:
        machine, sep, vol = tok.partition(":")
        try:
            if not sep:
                raise ValueError
            entry = (int(machine), float(vol))
        except ValueError:
            raise bad(f"malformed reducer entry {tok!r}") from None
        if entry[1] < 0 or not math.isfinite(entry[1]):
            raise bad(f"invalid reducer volume {tok!r}")
        receivers.append(entry)
    if arrival < 0:
        raise bad("negative arrival time")
    if n_map < 0 or n_red < 0:
        raise bad("negative mapper/reducer count")
    rec = RawCoflowRecord(cid, arrival, senders, tuple(receivers))
    if rec.total_volume > 0 and not senders:
        raise bad("coflow carries traffic but lists no mappers")
    return rec


def read_trace_header(text: str) -> tuple[int, int]:
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip():
            parts = line.split()
            try:
                machines, count = int(parts[0]), int(parts[1])
            except (IndexError, ValueError):
                raise TraceFormatError(f"line {lineno}: header must be '<machines> <coflows>'") from None
            return machines, count
    raise TraceFormatError("empty trace")


def ingest_fb_trace(text: str) -> list[RawCoflowRecord]:
    lines = [(n, ln) for n, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise TraceFormatError("empty trace")
    _, declared = read_trace_header(text)
    records = [_parse_record(ln.split(), n) for n, ln in lines[1:]]
    if len(records) != declared:
        raise TraceFormatError(f"header declares {declared} coflows but {len(records)} lines follow")
    return records


def write_fb_trace(records, num_machines: int) -> str:
    out = [f"{num_machines} {len(records)}"]
    for r in records:
        arrival = int(r.arrival_time) if float(r.arrival_time).is_integer() else r.arrival_time
        red = " ".join(f"{m}:{v!r}" for m, v in r.receivers)
        out.append(f"{r.id} {arrival} {len(r.senders)} {' '.join(map(str, r.senders))} {len(r.receivers)} {red}".replace("  ", " "))
    return "\n".join(out) + "\n"


def trace_machines(records) -> list[int]:
    seen = set()
    for r in records:
        seen.update(r.senders)
        seen.update(m for m, _ in r.receivers)
    return sorted(seen)


def expand_receiver_level(record: RawCoflowRecord, port_of: dict, num_ports: int, seed=None,
                          perturbation: tuple[float, float] = PERTURBATION) -> np.ndarray:
    """Spread each receiver's volume over the record's senders with a small random tilt.

    ``port_of`` maps machine -> port; a machine mapped to None is dropped
    (its flows vanish). Shares for one receiver sum to its volume exactly.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lo, hi = perturbation
    demand = np.zeros((num_ports, num_ports))
    for m in list(record.senders) + [m for m, _ in record.receivers]:
        if m not in port_of:
            raise KeyError(f"machine {m} of coflow {record.id} has no port")
    for machine, volume in record.receivers:
        if volume <= 0:
            continue
        j = port_of[machine]
        s = len(record.senders)
        factors = rng.uniform(lo, hi, size=s)
        if j is None:
            continue
        shares = volume * factors / factors.sum()
        shares[-1] = volume - shares[:-1].sum()
        for sender, share in zip(record.senders, shares):
            i = port_of[sender]
            if i is not None and share > 0:
                demand[i, j] += share
    return demand


REMAP = "remap"
DROP = "drop"


def sample_instance(records, num_ports: int, num_coflows: int, seed=0, *,
                    rates=(10.0, 20.0, 30.0), delay: float = 8.0, mode=SwitchMode.OCS,
                    weight_policy: str = "unit", max_weight: int = 10,
                    release_policy: str = "zero", time_unit: float = 1.0,
                    unselected: str = REMAP) -> Instance:
    """Pick machines and coflows from a trace and build an instance.

    Selected machines become ports 0..N-1 (in random order). Under ``remap``
    each unselected machine is folded onto a uniformly chosen selected port,
    under ``drop`` its traffic disappears. ``time_unit`` converts trace
    milliseconds into instance time units.
    """
    rng = np.random.default_rng(seed)
    machines = trace_machines(records)
    if num_ports > len(machines):
        raise ValueError(f"trace has only {len(machines)} machines, asked for {num_ports}")
    if num_coflows > len(records):
        raise ValueError(f"trace has only {len(records)} coflows, asked for {num_coflows}")
    chosen = rng.choice(len(machines), size=num_ports, replace=False)
    port_of = {machines[c]: p for p, c in enumerate(chosen)}
    for m in machines:
        if m not in port_of:
            port_of[m] = int(rng.integers(num_ports)) if unselected == REMAP else None
    if unselected not in (REMAP, DROP):
        raise ValueError(f"unknown unselected-machine policy {unselected!r}")
    picks = sorted(rng.choice(len(records), size=num_coflows, replace=False))
    picked = [records[q] for q in picks]
    base = min((r.arrival_time for r in picked), default=0.0)
    coflows = []
    for r in picked:
        d = expand_receiver_level(r, port_of, num_ports, rng)
        if weight_policy == "unit":
            w = 1.0
        elif weight_policy == "uniform-integer":
            w = float(rng.integers(1, max_weight + 1))
        else:
            raise ValueError(f"unknown weight policy {weight_policy!r}")
        if release_policy == "zero":
            a = 0.0
        elif release_policy == "trace":
            a = (r.arrival_time - base) * time_unit
        else:
            raise ValueError(f"unknown release policy {release_policy!r}")
        coflows.append(Coflow(r.id, d, w, a))
    cfg = NetworkConfig(num_ports, tuple(float(x) for x in rates), float(delay), SwitchMode(mode))
    return require_valid(Instance(cfg, tuple(coflows)))


def synth_generate(num_ports: int, num_coflows: int, rates=(10.0, 20.0, 30.0), delay: float = 8.0,
                   density: float = 0.3, volume_range=(1.0, 100.0), seed=0,
                   release_policy: str = "zero", max_release: float = 100.0,
                   weight_policy: str = "unit", max_weight: int = 10,
                   mode=SwitchMode.OCS) -> Instance:
    """Independent Bernoulli(density) entries with uniform volumes."""
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    lo, hi = volume_range
    if not 0 < lo <= hi:
        raise ValueError("volume range must satisfy 0 < low <= high")
    if num_ports < 1 or num_coflows < 0:
        raise ValueError("need at least one port and a non-negative coflow count")
    rng = np.random.default_rng(seed)
    n = num_ports
    coflows = []
    for m in range(num_coflows):
        mask = rng.random((n, n)) < density
        d = np.where(mask, rng.uniform(lo, hi, (n, n)), 0.0)
        if weight_policy == "unit":
            w = 1.0
        elif weight_policy == "uniform-integer":
            w = float(rng.integers(1, max_weight + 1))
        else:
            raise ValueError(f"unknown weight policy {weight_policy!r}")
        if release_policy == "zero":
            a = 0.0
        elif release_policy == "uniform":
            a = float(rng.uniform(0, max_release))
        else:
            raise ValueError(f"unknown release policy {release_policy!r}")
        coflows.append(Coflow(m, d, w, a))
    cfg = NetworkConfig(n, tuple(float(x) for x in rates), float(delay), SwitchMode(mode))
    return require_valid(Instance(cfg, tuple(coflows)))


# --------------------------------------------------------------------------- FB-like fallback

# category mix of the public Facebook 2010 coflow trace:
# short = longest flow < 5 MB, narrow = at most 50 flows
FB_CATEGORY_MIX = {"short-narrow": 0.52, "long-narrow": 0.16, "short-wide": 0.15, "long-wide": 0.17}


def synth_fb_like_trace(num_machines: int = 150, num_coflows: int = 526, seed=2010,
                        duration_ms: float = 3_600_000.0) -> list[RawCoflowRecord]:
    """Stand-in records shaped like the public trace when the real file is unavailable.

    Width and per-flow size are drawn log-uniformly inside each category;
    wide coflows span up to the whole cluster.
    """
    rng = np.random.default_rng(seed)
    names = list(FB_CATEGORY_MIX)
    probs = np.array([FB_CATEGORY_MIX[k] for k in names])
    arrivals = np.sort(rng.uniform(0, duration_ms, num_coflows)).round()
    machines = np.arange(1, num_machines + 1)

    def loguniform(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    out = []
    for cid in range(num_coflows):
        kind = names[rng.choice(len(names), p=probs)]
        if kind.endswith("narrow"):
            n_map = int(rng.integers(1, min(7, num_machines) + 1))
            n_red = int(rng.integers(1, min(max(1, 50 // n_map), num_machines) + 1))
        else:
            top = max(5, num_machines)
            for _ in range(100):
                n_map = min(int(round(loguniform(5, top))), num_machines)
                n_red = min(int(round(loguniform(5, top))), num_machines)
                if n_map * n_red > 50:
                    break
        per_flow_cap = loguniform(0.05, 4.9) if kind.startswith("short") else loguniform(5, 1000)
        senders = tuple(int(m) for m in rng.choice(machines, n_map, replace=False))
        receivers = []
        for r in rng.choice(machines, n_red, replace=False):
            # per-flow sizes in [cap/4, cap]; the largest flow sets the category
            vol = n_map * per_flow_cap * rng.uniform(0.25, 1.0)
            receivers.append((int(r), round(vol, 3)))
        out.append(RawCoflowRecord(cid + 1, float(arrivals[cid]), senders, tuple(receivers)))
    return out
