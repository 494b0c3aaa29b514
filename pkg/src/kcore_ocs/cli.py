"""Command line entry point: run, sweep, ingest, gen, check."""
from __future__ import annotations

import argparse
import logging
import sys

from . import harness, trace_io
from .circuit_sim import check_feasibility, schedule_from_json, schedule_to_json
from .metrics import record_to_json, records_to_csv
from .model import SwitchMode

log = logging.getLogger("kcore_ocs")


def _rates(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _format_records(records, fmt: str, with_runtime: bool) -> str:
    if fmt == "csv":
        return records_to_csv(records, with_runtime)
    return "".join(record_to_json(r, with_runtime) + "\n" for r in records)


def _apply_mode(instance, mode):
    return instance if mode is None else instance.with_mode(mode)


def cmd_run(args) -> int:
    if args.instance:
        inst = trace_io.load_instance(args.instance)
    else:
        plan = harness.ExperimentPlan(source={"kind": "fb-like"}, base_seed=args.seed,
                                      num_ports=args.ports, num_coflows=args.coflows,
                                      rates=args.rates, delay=args.delay, mode=args.mode or "ocs")
        inst = harness.cell_instance(plan, None, 0)
    inst = _apply_mode(inst, args.mode)
    schemes = tuple(args.schemes.split(",")) if args.schemes else harness.SCHEMES
    results = harness.compare(inst, schemes, seed=args.seed, backend=args.backend, on_error="record")
    records = [rec for _, rec in results.values()]
    _emit(_format_records(records, args.format, args.runtime), args.out)
    if args.schedule_out:
        res = results[schemes[0]][0]
        if res is not None:
            with open(args.schedule_out, "w") as fh:
                fh.write(schedule_to_json(res, inst))
    failed = [r for r in records if r.status != "ok"]
    for r in failed:
        log.error("%s aborted: %s", r.scheme, r.error)
    return 1 if failed else 0


def cmd_sweep(args) -> int:
    with open(args.plan) as fh:
        plan = harness.ExperimentPlan.from_json(fh.read())
    if args.seed is not None:
        plan.base_seed = args.seed
    if args.mode is not None:
        plan.mode = args.mode
    fmt = args.format or plan.format
    out = args.out or plan.output
    sink_fh = sys.stdout if out in (None, "-") else open(out, "w")
    try:
        first = [True]

        def sink(rec):
            # records stream out as cells finish
            if fmt == "csv":
                text = records_to_csv([rec], args.runtime)
                if not first[0]:
                    text = text.split("\n", 1)[1]
            else:
                text = record_to_json(rec, args.runtime) + "\n"
            first[0] = False
            sink_fh.write(text)
            sink_fh.flush()

        records = harness.run_sweep(plan, sink)
        if not records and fmt == "csv":
            sink_fh.write(records_to_csv([], args.runtime))
    finally:
        if sink_fh is not sys.stdout:
            sink_fh.close()
    errors = sum(r.status != "ok" for r in records)
    if errors:
        log.warning("%d of %d records failed", errors, len(records))
    return 0


def cmd_ingest(args) -> int:
    with open(args.trace) as fh:
        records = trace_io.ingest_fb_trace(fh.read())
    log.info("read %d coflows", len(records))
    inst = trace_io.sample_instance(records, args.ports, args.coflows or len(records), args.seed,
                                    rates=args.rates, delay=0.0 if args.mode == "eps" else args.delay,
                                    mode=args.mode or "ocs", weight_policy=args.weight_policy,
                                    release_policy=args.release_policy, unselected=args.unselected)
    _emit(trace_io.write_canonical(inst), args.out)
    return 0


def cmd_gen(args) -> int:
    if args.kind == "fb-trace":
        recs = trace_io.synth_fb_like_trace(args.machines, args.coflows or 526, args.seed)
        _emit(trace_io.write_fb_trace(recs, args.machines), args.out)
        return 0
    inst = trace_io.synth_generate(args.ports, args.coflows or 20, args.rates,
                                   0.0 if args.mode == "eps" else args.delay,
                                   args.density, (args.vmin, args.vmax), args.seed,
                                   release_policy=args.release_policy, mode=args.mode or "ocs")
    _emit(trace_io.write_canonical(inst), args.out)
    return 0


def cmd_check(args) -> int:
    inst = trace_io.load_instance(args.instance)
    with open(args.schedule) as fh:
        res = schedule_from_json(fh.read())
    report = check_feasibility(res, inst, None, args.model)
    for line in report:
        print(line)
    if not report:
        print(f"feasible: {len(res.events)} circuits, objective {res.objective!r}")
    return 1 if report else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kcore-ocs", description="Multi-core OCS coflow scheduling experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--seed", type=int, default=None if sp.prog.endswith("sweep") else 0)
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--mode", choices=[m.value for m in SwitchMode], default=None)
        if fmt:
            sp.add_argument("--format", choices=["csv", "jsonl"], default=None if sp.prog.endswith("sweep") else "csv")
            sp.add_argument("--runtime", action="store_true", help="include wall-clock column")

    def network(sp):
        sp.add_argument("--ports", type=int, default=10)
        sp.add_argument("--coflows", type=int, default=None)
        sp.add_argument("--rates", type=_rates, default=(10.0, 20.0, 30.0))
        sp.add_argument("--delay", type=float, default=8.0)

    sp = sub.add_parser("run", help="run schemes on one instance")
    common(sp)
    network(sp)
    sp.add_argument("--instance", help="canonical instance file; default samples the FB-like trace")
    sp.add_argument("--schemes", help="comma list, default all")
    sp.add_argument("--backend", choices=["highs", "simplex"], default="highs")
    sp.add_argument("--schedule-out", help="write the first scheme's event log here")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run an experiment plan")
    common(sp)
    sp.add_argument("plan")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("ingest", help="trace text -> canonical instance")
    common(sp, fmt=False)
    network(sp)
    sp.add_argument("trace")
    sp.add_argument("--weight-policy", choices=["unit", "uniform-integer"], default="unit")
    sp.add_argument("--release-policy", choices=["zero", "trace"], default="zero")
    sp.add_argument("--unselected", choices=[trace_io.REMAP, trace_io.DROP], default=trace_io.REMAP)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("gen", help="synthetic instance or FB-like trace")
    common(sp, fmt=False)
    network(sp)
    sp.add_argument("--kind", choices=["synthetic", "fb-trace"], default="synthetic")
    sp.add_argument("--density", type=float, default=0.3)
    sp.add_argument("--vmin", type=float, default=1.0)
    sp.add_argument("--vmax", type=float, default=100.0)
    sp.add_argument("--machines", type=int, default=150)
    sp.add_argument("--release-policy", choices=["zero", "uniform"], default="zero")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("check", help="audit a schedule event log")
    sp.add_argument("instance")
    sp.add_argument("schedule")
    sp.add_argument("--model", choices=["not-all-stop", "all-stop"], default=None)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "coflows", 0) is None and args.command == "run":
        args.coflows = 100
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
