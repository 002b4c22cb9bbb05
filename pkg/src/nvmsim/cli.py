"""Command-line front end: ``run``, ``sweep``, ``gen``, ``report``, ``validate``.

Config precedence, lowest first: config file, ``SIM_<KEY>`` environment
variables, ``--preset``, then per-key flags (``--dbt-entries 8``) and
``--set key=value``.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 unsafe backup (the message names the failure index).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Sequence

from .baselines import PRESETS, preset
from .config import (
    BUILTIN_CONFIG_DIR, ConfigError, HierarchyConfig, TraceError, backup_energy_full_l1, derive_k,
    load_config,
)
from .engine import PowerSchedule, Simulator, UnsafeBackupError, simulate_arrays, simulate_stream
from .oracle import check_consistency, oracle_run
from .results import csv_text, result_row
from .trace import (
    SYNTHETIC_PREFIX, SyntheticSpec, generate_tuples, load_arrays, parse_locality, parse_trace,
    trace_extent, write_trace,
)

DEFAULT_CONFIG = "paper-default"
EXIT_IO, EXIT_USAGE, EXIT_UNSAFE = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=DEFAULT_CONFIG,
                   help=f"config file (default: builtin {DEFAULT_CONFIG})")
    p.add_argument("--preset", choices=PRESETS, help="architecture preset applied on top of the config")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    group = p.add_argument_group("config keys")
    for f in fields(HierarchyConfig):
        group.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, metavar="V", default=None)


def _config_from_args(args: argparse.Namespace) -> HierarchyConfig:
    cfg = load_config(args.config)
    if args.preset:
        cfg = preset(args.preset, cfg)
    overrides: dict[str, Any] = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    for f in fields(HierarchyConfig):
        value = getattr(args, "cfg_" + f.name)
        if value is not None:
            overrides[f.name] = value
    return HierarchyConfig.from_mapping(overrides, cfg) if overrides else cfg


def _schedule(args: argparse.Namespace, total_instructions: int | None) -> PowerSchedule:
    chosen = [x for x in (args.failures_every, args.failures, args.failure_at) if x is not None]
    if len(chosen) > 1:
        raise ConfigError("use only one of --failures-every, --failures, --failure-at")
    if args.failures_every is not None:
        return PowerSchedule.periodic(args.failures_every)
    if args.failure_at is not None:
        return PowerSchedule.explicit(int(x, 0) for x in args.failure_at.split(",") if x.strip())
    if args.failures is not None:
        assert total_instructions is not None
        return PowerSchedule.evenly(total_instructions, args.failures)
    return PowerSchedule.none()


def _open_out(path: str | None):
    if path in (None, "-"):
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def _summary_header(cfg: HierarchyConfig) -> list[str]:
    return ["# configuration"] + [f"  {line}" for line in cfg.canonical().splitlines()]


# subcommands ------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    base = _config_from_args(args)
    archs = args.arch or [args.preset or "custom"]
    ref = args.trace
    synthetic = ref.startswith(SYNTHETIC_PREFIX)
    if not synthetic and not Path(ref).exists():
        raise TraceError(f"trace file {ref} does not exist")
    arrays = None
    total = None
    if synthetic or args.verify:
        arrays = load_arrays(ref, base.mem_size_bytes, base.mem_ops_per_instruction)
        total = int(arrays[2][-1]) + 1 if len(arrays[2]) else 0
    elif args.failures is not None:
        total = trace_extent(ref, base.mem_ops_per_instruction)[1]
    schedule = _schedule(args, total)

    rows, summary = [], []
    for i, arch in enumerate(archs):
        cfg = base if arch == "custom" else preset(arch, base) if args.arch else base
        cfg.validate()
        if args.verify:
            sim = Simulator(cfg, track_data=True)
            stats = sim.run_arrays(*arrays, schedule)
        elif arrays is not None:
            stats = simulate_arrays(cfg, *arrays, schedule)
        else:
            stats = simulate_stream(cfg, parse_trace(ref, cfg.mem_size_bytes, cfg.mem_ops_per_instruction),
                                    schedule)
        rows.append(result_row(i, arch, "run", cfg, schedule.describe(), stats, ref))
        summary += _summary_header(cfg)
        summary.append(f"# {arch}: {stats.accesses} accesses, {stats.instructions} instructions, "
                       f"{schedule.describe()}")
        summary.append(f"  energy {stats.total_energy_nj:.3f} nJ (stable {stats.stable_energy_nj:.3f}, "
                       f"backup {stats.backup_energy_nj:.3f}, restore {stats.restore_energy_nj:.3f})")
        summary.append(f"  cycles {stats.total_cycles}, stalls {stats.stall_cycles}; writes LLC "
                       f"{stats.llc_writes}, PCM {stats.pcm_writes}, BR {stats.br_writes}")
        summary.append(f"  backups {stats.backups_performed}, blocks {stats.blocks_backed_up}, "
                       f"peak dirty {stats.peak_dirty}, unsafe {stats.unsafe_backups}")
        if args.verify:
            report = check_consistency(sim.memory_image(), oracle_run(zip(*(a.tolist() for a in arrays)),
                                                                      cfg.block_size_bytes))
            summary.append("  consistency: pass" if report.passed else
                           f"  consistency: FAIL at address {report.first_divergent_address:#x}")
            if not report.passed:
                rows[-1]["label"] += " (inconsistent)"
    out = _open_out(args.out)
    try:
        out.write(csv_text(rows))
    finally:
        if out is not sys.stdout:
            out.close()
    _emit_summary(summary, args.summary)
    return 0


def _emit_summary(lines: list[str], path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stderr.write(text)


def cmd_sweep(args: argparse.Namespace) -> int:
    from .sweep import load_sweep_spec, ranking_csv, run_sweep, summary_lines

    spec = load_sweep_spec(args.spec)
    if args.trace:
        spec = type(spec)(**{**spec.__dict__, "trace": args.trace})
    result = run_sweep(spec, jobs=args.jobs)
    rows = result.rows()
    out = _open_out(args.out)
    try:
        out.write(csv_text(rows))
    finally:
        if out is not sys.stdout:
            out.close()
    if args.ranking:
        Path(args.ranking).parent.mkdir(parents=True, exist_ok=True)
        Path(args.ranking).write_text(ranking_csv(rows, spec.metric), newline="")
    _emit_summary(_summary_header(spec.base) + summary_lines(result, args.top), args.summary)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        record_count=args.records, write_fraction=args.write_fraction,
        working_set_bytes=args.working_set, locality=parse_locality(args.locality), seed=args.seed,
        base_address=args.base_address, mem_ops_per_instruction=args.mem_ops_per_instruction,
    )
    spec.validate(args.mem_size)
    path = write_trace(args.out, generate_tuples(spec))
    sys.stderr.write(f"wrote {spec.record_count} records to {path}\n")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from .plotting import render_report
    from .results import read_csv

    if not Path(args.results).exists():
        raise ConfigError(f"results file {args.results} does not exist")
    paths = render_report(read_csv(args.results), args.out, args.baseline, args.top)
    for p in paths:
        sys.stderr.write(f"wrote {p}\n")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args).validate()
    sys.stdout.write("\n".join(_summary_header(cfg)) + "\n")
    affordable = derive_k(cfg.e_capacitor_nj, cfg.e_reg_file_nj, cfg.llc_write_energy_nj)
    sys.stdout.write(
        f"# ok: K = {cfg.k_max_dirty} (M {cfg.dbt_entries} + N {cfg.wbq_entries}), capacitor affords "
        f"{affordable} blocks; full-L1 backup would need {backup_energy_full_l1(cfg):.3f} nJ\n"
    )
    return 0


# parser -----------------------------------------------------------------------

def _int(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nvmsim", description="Intermittently powered NVM hierarchy simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one trace")
    _add_config_args(run)
    run.add_argument("--trace", required=True, help="trace file (.mtr/.mtb) or synthetic:<fields>")
    run.add_argument("--arch", action="append", choices=PRESETS,
                     help="run this preset on the same trace; repeat for a comparison CSV")
    fail = run.add_argument_group("power failures")
    fail.add_argument("--failures-every", type=_int, metavar="INSTR", help="fail every INSTR instructions")
    fail.add_argument("--failures", type=_int, metavar="COUNT", help="COUNT failures spread evenly over the trace")
    fail.add_argument("--failure-at", metavar="LIST", help="comma-separated instruction indices")
    run.add_argument("--verify", action="store_true", help="track data and compare against the oracle")
    run.add_argument("--out", help="CSV output (default stdout)")
    run.add_argument("--summary", help="summary output (default stderr)")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="run a design-space sweep")
    sw.add_argument("spec", metavar="SWEEP_FILE", help="key = value sweep file")
    sw.add_argument("--trace", help="override the sweep file's trace")
    sw.add_argument("--out", help="CSV output (default stdout)")
    sw.add_argument("--ranking", help="write the ranking CSV here")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes")
    sw.add_argument("--top", type=int, default=5, help="ranked points in the summary")
    sw.add_argument("--summary", help="summary output (default stderr)")
    sw.set_defaults(func=cmd_sweep)

    gen = sub.add_parser("gen", help="write a synthetic trace")
    gen.add_argument("--out", required=True, help="output path; .mtb is binary, anything else text")
    gen.add_argument("--records", type=_int, required=True)
    gen.add_argument("--write-fraction", type=float, default=0.3)
    gen.add_argument("--working-set", type=_int, default=1 << 20, help="bytes")
    gen.add_argument("--locality", default="uniform", help="uniform | zipf:S | strided:B | loopnest:AxB | hotspot:...")
    gen.add_argument("--seed", type=_int, default=0)
    gen.add_argument("--base-address", type=_int, default=0)
    gen.add_argument("--mem-ops-per-instruction", type=float, default=0.4)
    gen.add_argument("--mem-size", type=_int, default=HierarchyConfig().mem_size_bytes)
    gen.set_defaults(func=cmd_gen)

    rep = sub.add_parser("report", help="render SVG figures from a results CSV")
    rep.add_argument("results", help="CSV written by run or sweep")
    rep.add_argument("--out", required=True, help="directory for the SVG files")
    rep.add_argument("--baseline", help="label to normalize against (default baseline-1 if present)")
    rep.add_argument("--top", type=int, default=12, help="bars per figure for large result sets")
    rep.set_defaults(func=cmd_report)

    val = sub.add_parser("validate", help="check a configuration")
    _add_config_args(val)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsafeBackupError as exc:
        sys.stderr.write(f"nvmsim: {exc}\n")
        return EXIT_UNSAFE
    except (ConfigError, TraceError) as exc:
        sys.stderr.write(f"nvmsim: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"nvmsim: {exc}\n")
        return EXIT_IO


def _builtin_configs() -> list[str]:
    return sorted(p.name for p in BUILTIN_CONFIG_DIR.iterdir()) if BUILTIN_CONFIG_DIR.exists() else []


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
