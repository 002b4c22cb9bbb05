"""Design-space sweep over (K, M, N, WC, policy, BR, failure count).

Every point is paired with a reference run (baseline-2 by default) on the
same trace and failure count; the CSV carries both rows so each point's
energy gain can be checked from the file alone.  Reference runs are shared
between points with the same failure count.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import preset, variant_config
from .config import (
    ConfigError, HierarchyConfig, PAPER_DEFAULT, Policy, coerce, parse_kv_text,
)
from .engine import PowerSchedule, simulate_arrays
from .results import COLUMNS, config_hash, csv_text, energy_gain, result_row
from .stats import SimStats
from .trace import load_arrays

LIST_KEYS = {"k", "m", "n", "mn", "wc_bits", "policy", "br_enabled", "failures"}
SPEC_KEYS = LIST_KEYS | {"trace", "baseline", "metric"}


@dataclass(frozen=True)
class SweepSpec:
    trace: str
    k_values: tuple[int, ...] = (16,)
    m_values: tuple[int, ...] = tuple(range(1, 17))
    n_values: tuple[int, ...] = tuple(range(0, 16))
    mn_pairs: tuple[tuple[int, int], ...] = ()
    wc_bits: tuple[int, ...] = (6,)
    policies: tuple[Policy, ...] = (Policy.LFW, Policy.LRW)
    br: tuple[bool, ...] = (True, False)
    failures: tuple[int, ...] = (200, 500, 1000)
    baseline: str = "baseline-2"
    metric: str = "total_energy_nj"
    base: HierarchyConfig = PAPER_DEFAULT


@dataclass(frozen=True)
class SweepPoint:
    index: int
    k: int
    m: int
    n: int
    wc_bits: int
    policy: Policy
    br_enabled: bool
    failures: int
    config: HierarchyConfig

    @property
    def label(self) -> str:
        return "proposed" if self.br_enabled else "proposed-nobr"


@dataclass
class Expansion:
    points: list[SweepPoint]
    filtered: int = 0
    duplicates: int = 0
    reasons: dict[str, int] = field(default_factory=dict)


# spec parsing ---------------------------------------------------------------

def _int_list(raw: str, key: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in (p.strip() for p in raw.split(",")):
        if not part:
            continue
        lo, sep, hi = part.replace("..", "-").partition("-")
        try:
            if sep and lo:
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {part!r} as an integer or range") from None
    return tuple(out)


def _bool_list(raw: str, key: str) -> tuple[bool, ...]:
    return tuple(coerce("bool", p, key) for p in raw.split(",") if p.strip())


def parse_sweep_spec(text: str, source: str = "<sweep>") -> SweepSpec:
    """Key-value sweep file; list keys take comma lists and ``a-b`` ranges.

    Keys other than the sweep's own fix the base hierarchy config.
    """
    values = parse_kv_text(text, source)
    if "trace" not in values:
        raise ConfigError(f"{source}: sweep needs a 'trace' key")
    overrides = {k: v for k, v in values.items() if k not in SPEC_KEYS}
    kwargs: dict = {"trace": values["trace"], "base": HierarchyConfig.from_mapping(overrides)}
    if "k" in values:
        kwargs["k_values"] = _int_list(values["k"], "k")
    if "m" in values:
        kwargs["m_values"] = _int_list(values["m"], "m")
    if "n" in values:
        kwargs["n_values"] = _int_list(values["n"], "n")
    if "mn" in values:
        pairs = []
        for part in (p.strip() for p in values["mn"].split(",") if p.strip()):
            m, sep, n = part.partition(":")
            if not sep:
                raise ConfigError(f"mn: expected M:N, got {part!r}")
            pairs.append((int(m), int(n)))
        kwargs["mn_pairs"] = tuple(pairs)
    if "wc_bits" in values:
        kwargs["wc_bits"] = _int_list(values["wc_bits"], "wc_bits")
    if "policy" in values:
        try:
            kwargs["policies"] = tuple(Policy(p.strip().lower()) for p in values["policy"].split(",") if p.strip())
        except ValueError as exc:
            raise ConfigError(f"policy: {exc}") from None
    if "br_enabled" in values:
        kwargs["br"] = _bool_list(values["br_enabled"], "br_enabled")
    if "failures" in values:
        kwargs["failures"] = _int_list(values["failures"], "failures")
    if "baseline" in values:
        kwargs["baseline"] = values["baseline"]
    if "metric" in values:
        kwargs["metric"] = values["metric"]
    return SweepSpec(**kwargs)


def load_sweep_spec(path: str | Path) -> SweepSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {path}: {exc}") from exc
    return parse_sweep_spec(text, str(path))


# expansion ------------------------------------------------------------------

def expand(spec: SweepSpec) -> Expansion:
    """Cartesian product of the sweep lists, keeping only points with M + N = K.

    LRW ignores the counter width, so LRW points that differ only in
    ``wc_bits`` collapse into one (counted as duplicates).
    """
    pairs = spec.mn_pairs or tuple(itertools.product(spec.m_values, spec.n_values))
    out = Expansion([])
    seen: set[tuple] = set()
    for k, (m, n), wc, policy, br, failures in itertools.product(
            spec.k_values, pairs, spec.wc_bits, spec.policies, spec.br, spec.failures):
        if m + n != k:
            out.filtered += 1
            out.reasons["M + N != K"] = out.reasons.get("M + N != K", 0) + 1
            continue
        cfg = variant_config(spec.base, k, m, n, wc, policy, br)
        try:
            cfg.validate()
        except ConfigError as exc:
            out.filtered += 1
            out.reasons[str(exc)] = out.reasons.get(str(exc), 0) + 1
            continue
        key = (cfg, failures)
        if key in seen:
            out.duplicates += 1
            continue
        seen.add(key)
        out.points.append(SweepPoint(len(out.points), k, m, n, cfg.wc_bits, Policy(policy), br, failures, cfg))
    if not out.points:
        raise ConfigError("sweep expands to no valid runs")
    return out


# execution ------------------------------------------------------------------

_ARRAYS: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None


def _init_worker(arrays: tuple[np.ndarray, np.ndarray, np.ndarray]) -> None:
    global _ARRAYS
    _ARRAYS = arrays


def _simulate(job: tuple[HierarchyConfig, int]) -> SimStats:
    config, failures = job
    assert _ARRAYS is not None
    kinds, addrs, instrs = _ARRAYS
    total = int(instrs[-1]) + 1 if len(instrs) else 0
    schedule = PowerSchedule.evenly(total, failures) if failures else None
    return simulate_arrays(config, kinds, addrs, instrs, schedule)


@dataclass
class SweepResult:
    spec: SweepSpec
    expansion: Expansion
    variant_stats: list[SimStats]
    baseline_stats: dict[int, SimStats]
    baseline_config: HierarchyConfig

    def rows(self) -> list[dict[str, str]]:
        """Each point's row followed by its paired reference row."""
        out = []
        for point, stats in zip(self.expansion.points, self.variant_stats):
            base = self.baseline_stats[point.failures]
            gain = energy_gain(base.total_energy_nj, stats.total_energy_nj)
            out.append(result_row(point.index, point.label, "variant", point.config, point.failures,
                                  stats, self.spec.trace, gain))
            out.append(result_row(point.index, self.spec.baseline, "baseline", self.baseline_config,
                                  point.failures, base, self.spec.trace, 0.0))
        return out

    def csv(self) -> str:
        return csv_text(self.rows())


def run_sweep(spec: SweepSpec, jobs: int = 1,
              arrays: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None) -> SweepResult:
    expansion = expand(spec)
    if arrays is None:
        arrays = load_arrays(spec.trace, spec.base.mem_size_bytes, spec.base.mem_ops_per_instruction)
    base_cfg = preset(spec.baseline, spec.base).validate()
    failure_counts = sorted({p.failures for p in expansion.points})
    work = [(p.config, p.failures) for p in expansion.points] + [(base_cfg, f) for f in failure_counts]
    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(arrays,)) as pool:
            stats = list(pool.map(_simulate, work, chunksize=4))
    else:
        _init_worker(arrays)
        stats = [_simulate(job) for job in work]
    npoints = len(expansion.points)
    baselines = dict(zip(failure_counts, stats[npoints:]))
    return SweepResult(spec, expansion, stats[:npoints], baselines, base_cfg)


# ranking --------------------------------------------------------------------

HIGHER_IS_BETTER = {"energy_gain_pct"}

RANK_COLUMNS = (
    "rank", "run_id", "config_hash", "label", "k_max_dirty", "dbt_entries", "wbq_entries",
    "wc_bits", "policy", "br_enabled", "failures", "metric", "value", "energy_gain_pct",
)


def rank(rows: Sequence[dict[str, str]], metric: str = "total_energy_nj") -> list[dict[str, str]]:
    """Order variant rows by ``metric`` (best first), ties broken by config hash then run id."""
    variants = [r for r in rows if r.get("role", "variant") == "variant"]
    if not variants:
        raise ConfigError("nothing to rank")
    if metric not in variants[0]:
        raise ConfigError(f"unknown metric {metric!r}")
    sign = -1.0 if metric in HIGHER_IS_BETTER else 1.0
    ordered = sorted(variants, key=lambda r: (sign * float(r[metric]), r["config_hash"], int(r["run_id"])))
    out = []
    for i, r in enumerate(ordered, 1):
        entry = {c: r.get(c, "") for c in RANK_COLUMNS}
        entry.update(rank=str(i), metric=metric, value=r[metric])
        out.append(entry)
    return out


def ranking_csv(rows: Sequence[dict[str, str]], metric: str = "total_energy_nj") -> str:
    return csv_text(rank(rows, metric), RANK_COLUMNS)


def summary_lines(result: SweepResult, top: int = 5) -> list[str]:
    exp = result.expansion
    lines = [
        f"sweep: {len(exp.points)} runs, {exp.filtered} combinations filtered, "
        f"{exp.duplicates} duplicates collapsed",
        f"trace: {result.spec.trace}",
        f"reference: {result.spec.baseline}",
    ]
    for reason, count in sorted(exp.reasons.items()):
        lines.append(f"  filtered ({reason}): {count}")
    ranked = rank(result.rows(), result.spec.metric)
    for r in ranked[:top]:
        lines.append(
            f"  #{r['rank']}: K={r['k_max_dirty']} M={r['dbt_entries']} N={r['wbq_entries']} "
            f"WC={r['wc_bits']} {r['policy']} BR={r['br_enabled']} failures={r['failures']} "
            f"{r['metric']}={r['value']} gain={float(r['energy_gain_pct']):.2f}%"
        )
    return lines


def full_split_spec(trace: str, failures: Iterable[int] = (200, 500, 1000), k: int = 16) -> SweepSpec:
    """All (M, N) with M + N = K, both policies, BR on and off."""
    return SweepSpec(trace=trace, k_values=(k,), m_values=tuple(range(1, k + 1)),
                     n_values=tuple(range(0, k)), failures=tuple(failures))


__all__ = [
    "COLUMNS", "Expansion", "RANK_COLUMNS", "SweepPoint", "SweepResult", "SweepSpec",
    "config_hash", "expand", "load_sweep_spec", "full_split_spec", "parse_sweep_spec",
    "rank", "ranking_csv", "run_sweep", "summary_lines",
]
