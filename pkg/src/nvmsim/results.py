"""One CSV schema for every run: provenance columns, key config knobs, all stats."""

from __future__ import annotations

import csv
import hashlib
import io
from pathlib import Path
from typing import IO, Iterable, Mapping

from .config import HierarchyConfig, format_value
from .stats import SimStats

CONFIG_COLUMNS = (
    "k_max_dirty", "dbt_entries", "wbq_entries", "wc_bits", "policy", "br_enabled",
    "write_policy", "dbt_enabled", "l1_size_bytes", "llc_volatile",
)
ID_COLUMNS = ("run_id", "label", "role", "config_hash", "failures", "trace")
COLUMNS = ID_COLUMNS + CONFIG_COLUMNS + tuple(SimStats.field_names()) + ("energy_gain_pct",)


def config_hash(config: HierarchyConfig, failures: object = None) -> str:
    text = config.canonical() + f"failures = {failures}\n"
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def energy_gain(baseline_nj: float, energy_nj: float) -> float:
    """Percent energy saved relative to ``baseline_nj``; positive is better."""
    if baseline_nj == 0:
        return 0.0
    return (baseline_nj - energy_nj) / baseline_nj * 100.0


def result_row(run_id: int, label: str, role: str, config: HierarchyConfig, failures: object,
               stats: SimStats, trace: str = "", gain: float | None = None) -> dict[str, str]:
    row = {
        "run_id": str(run_id), "label": label, "role": role,
        "config_hash": config_hash(config, failures), "failures": str(failures), "trace": trace,
    }
    values = config.to_dict()
    for key in CONFIG_COLUMNS:
        row[key] = format_value(values[key])
    for key, value in stats.as_dict().items():
        row[key] = format_value(value)
    row["energy_gain_pct"] = "" if gain is None else format_value(gain)
    return row


def write_csv(rows: Iterable[Mapping[str, str]], out: IO[str] | str | Path,
              columns: tuple[str, ...] = COLUMNS) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_csv(rows, fh, columns)
        return
    writer = csv.DictWriter(out, fieldnames=list(columns), extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def csv_text(rows: Iterable[Mapping[str, str]], columns: tuple[str, ...] = COLUMNS) -> str:
    buf = io.StringIO(newline="")
    write_csv(rows, buf, columns)
    return buf.getvalue()


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
