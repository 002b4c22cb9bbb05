"""Static SVG bar charts from a results CSV, normalized to a reference run."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import ConfigError  # noqa: E402

# family -> (title, total column or None for grouped bars, [(column, legend)])
# Stacked families split the total into parts, all scaled by the reference total.
FAMILIES: dict[str, tuple[str, str | None, list[tuple[str, str]]]] = {
    "writes": ("Writes per level", None, [("llc_writes", "LLC (STT-RAM)"), ("pcm_writes", "PCM"),
                                          ("br_writes", "backup region")]),
    "energy": ("Dynamic energy", "total_energy_nj", [("stable_energy_nj", "stable power"),
                                                     ("backup_energy_nj", "backup"),
                                                     ("restore_energy_nj", "restore")]),
    "cycles": ("Execution time", "total_cycles", [("stall_cycles", "stall"), ("", "other")]),
}


def _bar_label(row: dict[str, str], duplicate: bool) -> str:
    label = row.get("label") or f"run {row.get('run_id', '?')}"
    if not duplicate:
        return label
    extra = f"M{row.get('dbt_entries')}N{row.get('wbq_entries')} {row.get('policy')}"
    if row.get("failures") not in (None, "", "0", "None"):
        extra += f" f{row['failures']}"
    return f"{label}\n{extra}"


def select_rows(rows: Sequence[dict[str, str]], top: int = 12) -> list[dict[str, str]]:
    """Small result sets plot whole; sweeps plot their ``top`` best variants by total energy."""
    if len(rows) <= top:
        return list(rows)
    variants = [r for r in rows if r.get("role", "variant") == "variant"]
    best = sorted(variants, key=lambda r: (float(r["total_energy_nj"]), r.get("config_hash", "")))[:top]
    return sorted(best, key=lambda r: int(r.get("run_id", 0)))


def _reference(rows: Sequence[dict[str, str]], all_rows: Sequence[dict[str, str]],
               row: dict[str, str], baseline: str | None) -> dict[str, str]:
    if baseline is None:
        return rows[0]
    same = [r for r in all_rows if r.get("label") == baseline]
    if not same:
        raise ConfigError(f"reference {baseline!r} not found in the results")
    for r in same:
        if r.get("failures") == row.get("failures"):
            return r
    return same[0]


def _normalized(value: str, ref: str) -> float:
    v, r = float(value or 0), float(ref or 0)
    if r == 0:
        return 0.0 if v == 0 else float("nan")
    return v / r


def render_family(family: str, rows: Sequence[dict[str, str]], all_rows: Sequence[dict[str, str]],
                  baseline: str | None, path: Path) -> Path:
    title, total, series = FAMILIES[family]
    refs = [_reference(rows, all_rows, r, baseline) for r in rows]
    labels = [r.get("label", "") for r in rows]
    dup = len(set(labels)) != len(labels)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(rows) + 2), 4.2))
    if total is None:
        series = [(c, n) for c, n in series if any(float(r.get(c) or 0) for r in all_rows)] or series[:1]
        width = 0.8 / len(series)
        for j, (column, name) in enumerate(series):
            heights = [_normalized(r.get(column, "0"), ref.get(column, "0")) for r, ref in zip(rows, refs)]
            xs = [i + (j - (len(series) - 1) / 2) * width for i in range(len(rows))]
            ax.bar(xs, heights, width, label=name)
    else:
        bottom = [0.0] * len(rows)
        named = [c for c, _ in series if c]
        for column, name in series:
            if column:
                values = [float(r.get(column) or 0) for r in rows]
            else:  # remainder of the total
                values = [float(r.get(total) or 0) - sum(float(r.get(c) or 0) for c in named) for r in rows]
            heights = [_normalized(str(v), ref.get(total, "0")) for v, ref in zip(values, refs)]
            ax.bar(range(len(rows)), heights, 0.6, bottom=bottom, label=name)
            bottom = [b + h for b, h in zip(bottom, heights)]
    ax.axhline(1.0, color="black", linewidth=0.6)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels([_bar_label(r, dup) for r in rows], rotation=30 if dup else 0, ha="right" if dup else "center",
                       fontsize=7 if dup else 9)
    ref_name = baseline or (rows[0].get("label") if rows else "")
    ax.set_ylabel(f"normalized to {ref_name}")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def render_report(rows: Sequence[dict[str, str]], out_dir: str | Path, baseline: str | None = None,
                  top: int = 12) -> list[Path]:
    """Write ``writes.svg``, ``energy.svg`` and ``cycles.svg``; returns their paths."""
    if not rows:
        raise ConfigError("results file has no rows")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if baseline is None and any(r.get("label") == "baseline-1" for r in rows):
        baseline = "baseline-1"
    chosen = select_rows(rows, top)
    with matplotlib.rc_context({"svg.hashsalt": "nvmsim", "svg.fonttype": "path"}):
        return [render_family(f, chosen, rows, baseline, out / f"{f}.svg") for f in FAMILIES]
