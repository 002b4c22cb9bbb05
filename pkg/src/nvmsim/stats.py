"""Access counters, the dynamic-energy ledger and the per-run result record."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

from .config import HierarchyConfig


class Counts(NamedTuple):
    """Block-level operation counts at every level of the hierarchy."""

    l1_reads: int = 0
    l1_writes: int = 0
    llc_reads: int = 0
    llc_writes: int = 0
    pcm_reads: int = 0
    pcm_writes: int = 0
    br_reads: int = 0
    br_writes: int = 0
    regfile_writes: int = 0

    def __sub__(self, other: "Counts") -> "Counts":  # type: ignore[override]
        return Counts(*(a - b for a, b in zip(self, other)))

    def __add__(self, other: "Counts") -> "Counts":  # type: ignore[override]
        return Counts(*(a + b for a, b in zip(self, other)))


class EnergyLedger:
    """Turns operation counts into dynamic energy (nJ).

    The backup region is STT-RAM and costs the same per block as the LLC.
    Energy is always recomputed from integer counts, so equal traffic gives
    bit-identical energy.
    """

    def __init__(self, config: HierarchyConfig):
        c = config
        self.unit = Counts(
            c.l1_read_energy_nj, c.l1_write_energy_nj,
            c.llc_read_energy_nj, c.llc_write_energy_nj,
            c.pcm_read_energy_nj, c.pcm_write_energy_nj,
            c.llc_read_energy_nj, c.llc_write_energy_nj,
            c.e_reg_file_nj,
        )

    def energy(self, counts: Counts) -> float:
        total = 0.0
        for n, e in zip(counts, self.unit):
            if n:
                total += n * e
        return total


@dataclass
class SimStats:
    instructions: int = 0
    accesses: int = 0
    l1_reads: int = 0
    l1_writes: int = 0
    l1_hits: int = 0
    l1_misses: int = 0
    llc_reads: int = 0
    llc_writes: int = 0
    llc_hits: int = 0
    llc_misses: int = 0
    pcm_reads: int = 0
    pcm_writes: int = 0
    br_reads: int = 0
    br_writes: int = 0
    stall_cycles: int = 0
    wbq_full_stalls: int = 0
    total_cycles: int = 0
    backup_cycles: int = 0
    restore_cycles: int = 0
    stable_energy_nj: float = 0.0
    backup_energy_nj: float = 0.0
    restore_energy_nj: float = 0.0
    total_energy_nj: float = 0.0
    backups_performed: int = 0
    blocks_backed_up: int = 0
    unsafe_backups: int = 0
    backup_energy_min_nj: float = 0.0
    backup_energy_max_nj: float = 0.0
    peak_dirty: int = 0
    peak_dbt: int = 0
    peak_wbq: int = 0

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, int | float]:
        return asdict(self)

    @property
    def backup_energy_constant(self) -> bool:
        return self.backups_performed > 0 and self.backup_energy_min_nj == self.backup_energy_max_nj
