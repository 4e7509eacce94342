"""Command-line driver: trace generation, single runs, mechanism
comparisons, and occupancy reports."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import engine, report, trace
from .config import MECHANISMS, SimConfig, load_config
from .errors import (ConfigError, ConfigMismatch, InvalidSpec,
                     NonCanonicalAddress, ParseError, SimError)
from .trace import GeneratorSpec, Workload

logger = logging.getLogger(__name__)


def _load_config_arg(path: str | None) -> SimConfig:
    if path is None:
        return load_config({})
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SimError(f"config {path}: invalid JSON ({exc})") from None
    return load_config(raw)


def _load_workload(path: str) -> Workload:
    with open(path, encoding="utf-8") as fh:
        records = trace.parse_trace(fh.read())
    if not records:
        raise SimError(f"trace {path}: no records")
    return Workload.from_records(records)


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    logger.info("wrote %s", path)


def cmd_gen(args) -> int:
    spec = GeneratorSpec(kind=args.kind, pages=args.pages,
                         accesses=args.accesses, cores=args.cores,
                         seed=args.seed, zipf_s=args.zipf_s,
                         write_fraction=args.write_fraction,
                         base=args.base, shared=args.shared)
    _write(args.out, trace.write_trace(trace.generate(spec)))
    return 0


def cmd_run(args) -> int:
    config = _load_config_arg(args.config)
    workload = _load_workload(args.trace)
    stats = engine.simulate(config, workload)
    _write(args.out, report.to_json(report.build_report(config, stats)))
    return 0


def cmd_compare(args) -> int:
    config = _load_config_arg(args.config)
    workload = _load_workload(args.trace)
    mechanisms = [m.strip() for m in args.mechanisms.split(",") if m.strip()]
    for m in mechanisms:
        if m not in MECHANISMS:
            raise SimError(f"unknown mechanism {m!r}; "
                           f"expected one of {','.join(MECHANISMS)}")
    rows = engine.compare(config, workload, mechanisms)
    _write(args.out, report.speedup_csv(rows))
    if args.plot:
        from . import plots
        plots.render_speedups(rows, args.plot)
    return 0


def cmd_occupancy(args) -> int:
    config = _load_config_arg(args.config)
    workload = _load_workload(args.trace)
    sim = engine.Simulation(config)
    pt = sim.warmup(workload)
    occupancy = {
        level: {"nodes": occ.nodes, "valid_entries": occ.valid_entries,
                "occupancy": occ.ratio}
        for level, occ in pt.occupancy_report().items()}
    lines = ["level,nodes,valid_entries,occupancy"]
    for level, row in occupancy.items():
        lines.append(f"{level},{row['nodes']},{row['valid_entries']},"
                     f"{row['occupancy']:.6f}")
    _write(args.out, "\n".join(lines) + "\n")
    if args.plot:
        from . import plots
        plots.render_occupancy(occupancy, args.plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ndpsim",
        description="Trace-driven simulator of address translation and the "
                    "memory hierarchy in near-data-processing systems.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic trace file")
    gen.add_argument("--kind", required=True, choices=trace.GENERATOR_KINDS)
    gen.add_argument("--pages", type=int, required=True,
                     help="footprint in 4KB pages (per core)")
    gen.add_argument("--accesses", type=int, required=True,
                     help="record count per core")
    gen.add_argument("--cores", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--zipf-s", type=float, default=1.2,
                     help="Zipf exponent (zipf kind only)")
    gen.add_argument("--write-fraction", type=float, default=0.5,
                     help="fraction of writes (gups kind only)")
    gen.add_argument("--base", type=lambda s: int(s, 0),
                     default=trace.DEFAULT_BASE)
    gen.add_argument("--shared", action="store_true",
                     help="all cores replay one identical stream over a "
                          "shared footprint")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen, stage="generate")

    run = sub.add_parser("run", help="single mechanism run -> JSON report")
    run.add_argument("--config", help="JSON config file (defaults if omitted)")
    run.add_argument("--trace", required=True)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run, stage="run")

    cmp_ = sub.add_parser("compare",
                          help="speedup table across mechanisms -> CSV")
    cmp_.add_argument("--config", help="JSON config file")
    cmp_.add_argument("--trace", required=True)
    cmp_.add_argument("--mechanisms", default="radix,flat,huge,ndpage,ideal")
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--plot", help="also render a bar chart to this file")
    cmp_.set_defaults(func=cmd_compare, stage="run")

    occ = sub.add_parser("occupancy",
                         help="per-level page table occupancy -> CSV")
    occ.add_argument("--config", help="JSON config file")
    occ.add_argument("--trace", required=True)
    occ.add_argument("--out", required=True)
    occ.add_argument("--plot", help="also render a bar chart to this file")
    occ.set_defaults(func=cmd_occupancy, stage="run")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"ndpsim: parse: {exc}", file=sys.stderr)
        return 1
    except SimError as exc:
        if isinstance(exc, (ParseError, NonCanonicalAddress)):
            stage = "parse"
        elif isinstance(exc, (ConfigError, ConfigMismatch, InvalidSpec)):
            stage = "config"
        else:
            stage = getattr(args, "stage", "run")
        print(f"ndpsim: {stage}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
