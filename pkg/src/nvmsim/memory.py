"""STT-RAM last-level cache, STT-RAM backup region and PCM main memory.

Blocks are identified by block number (``address >> log2(block_size)``).
Data payloads are only carried when the owning simulator tracks data;
otherwise every payload is ``None`` and only timing and counts are modeled.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import NamedTuple

from .config import HierarchyConfig


class MainMemory:
    """PCM main memory: a sparse block store, zero-filled where never written."""

    def __init__(self, config: HierarchyConfig, track_data: bool = False):
        self.block_size = config.block_size_bytes
        self.track_data = track_data
        self.blocks: dict[int, bytes] = {}
        self.reads = 0
        self.writes = 0
        self._zero = bytes(self.block_size)

    def read(self, block: int) -> bytes | None:
        self.reads += 1
        if self.track_data:
            return self.blocks.get(block, self._zero)
        return None

    def write(self, block: int, data: bytes | None) -> None:
        self.writes += 1
        if self.track_data:
            self.blocks[block] = bytes(data)


class LastLevelCache:
    """Write-back, write-allocate, LRU set-associative STT-RAM cache.

    Line fills from PCM are not counted as LLC writes; a dirty victim is
    written to PCM and, on the demand path, its write latency is returned.
    """

    def __init__(self, config: HierarchyConfig, pcm: MainMemory, track_data: bool = False):
        self.num_sets = config.llc_sets
        self.assoc = config.llc_assoc
        self.set_mask = self.num_sets - 1
        self.pcm = pcm
        self.track_data = track_data
        self.read_cycles = config.sttram_read_cycles
        self.write_cycles = config.sttram_write_cycles
        self.pcm_read_cycles = config.pcm_read_cycles
        self.pcm_write_cycles = config.pcm_write_cycles
        self.miss_read_cycles = self.read_cycles + self.pcm_read_cycles
        self.sets: list[OrderedDict[int, bool]] = [OrderedDict() for _ in range(self.num_sets)]
        self.data: dict[int, bytes] = {}
        self.reads = self.writes = 0
        self.hits = self.misses = 0

    def __contains__(self, block: int) -> bool:
        return block in self.sets[block & self.set_mask]

    def _make_room(self, ways: OrderedDict[int, bool]) -> int:
        if len(ways) < self.assoc:
            return 0
        victim, dirty = ways.popitem(last=False)
        data = self.data.pop(victim, None)
        if dirty:
            self.pcm.write(victim, data)
            return self.pcm_write_cycles
        return 0

    def read(self, block: int) -> tuple[int, bytes | None]:
        """Demand read of one block; returns ``(cycles, data)``."""
        ways = self.sets[block & self.set_mask]
        self.reads += 1
        if block in ways:
            self.hits += 1
            ways.move_to_end(block)
            return self.read_cycles, self.data.get(block) if self.track_data else None
        self.misses += 1
        cycles = self.miss_read_cycles
        if len(ways) >= self.assoc:
            cycles += self._make_room(ways)
        ways[block] = False
        if self.track_data:
            data = self.data[block] = self.pcm.read(block)
            return cycles, data
        self.pcm.reads += 1
        return cycles, None

    def write(self, block: int, data: bytes | None) -> int:
        """Full-block write (writeback or write-through); returns cycles."""
        ways = self.sets[block & self.set_mask]
        self.writes += 1
        cycles = self.write_cycles
        if block in ways:
            self.hits += 1
            ways.move_to_end(block)
        else:
            self.misses += 1
            cycles += self._make_room(ways)
        ways[block] = True
        if self.track_data:
            self.data[block] = bytes(data)
        return cycles

    def dirty_blocks(self) -> dict[int, bytes | None]:
        return {b: self.data.get(b) for ways in self.sets for b, d in ways.items() if d}

    def flush_and_invalidate(self) -> int:
        """Write every dirty line to PCM and drop all contents (volatile LLC)."""
        flushed = 0
        for ways in self.sets:
            for block, dirty in ways.items():
                if dirty:
                    self.pcm.write(block, self.data.get(block))
                    flushed += 1
            ways.clear()
        self.data.clear()
        return flushed

    def lru_order(self, set_index: int) -> list[int]:
        return list(self.sets[set_index])


class BackupRecord(NamedTuple):
    """One dirty block captured at a power failure.

    ``origin`` is ``"dbt"``, ``"wbq"`` or ``"line"`` (untracked baseline line).
    ``counter`` is the DBT write count or recency rank; ``resident`` tells
    whether a WBQ entry still occupied its L1 way.
    """

    origin: str
    block: int
    set_index: int
    way: int
    counter: int
    resident: bool
    data: bytes | None


class BackupRegion:
    """Non-volatile STT-RAM region holding up to K blocks plus the register file.

    Accesses cost the same as the STT-RAM LLC.  Contents survive power loss
    and are consumed by :meth:`restore`.
    """

    def __init__(self, capacity: int, write_energy_nj: float, read_energy_nj: float,
                 e_reg_file_nj: float, write_cycles: int = 10, read_cycles: int = 2):
        self.capacity = capacity
        self.write_energy_nj = write_energy_nj
        self.read_energy_nj = read_energy_nj
        self.e_reg_file_nj = e_reg_file_nj
        self.write_cycles = write_cycles
        self.read_cycles = read_cycles
        self.records: list[BackupRecord] = []
        self.regfile: object = None
        self.valid = False
        self.writes = 0  # block slots written
        self.reads = 0
        self.regfile_writes = 0

    @classmethod
    def for_config(cls, config: HierarchyConfig) -> "BackupRegion":
        return cls(config.br_capacity, config.llc_write_energy_nj, config.llc_read_energy_nj,
                   config.e_reg_file_nj, config.sttram_write_cycles, config.sttram_read_cycles)

    @property
    def valid_count(self) -> int:
        return len(self.records) + (1 if self.valid else 0)

    def store(self, blocks: list[BackupRecord], regfile: object, pad_to: int = 0) -> float:
        """Persist a checkpoint atomically and return its energy in nJ.

        ``pad_to`` writes a fixed-size image of that many block slots even when
        fewer blocks are dirty.
        """
        assert len(blocks) <= self.capacity, (
            f"backup of {len(blocks)} blocks exceeds backup region capacity {self.capacity}")
        slots = max(len(blocks), min(pad_to, self.capacity))
        self.records = list(blocks)
        self.regfile = regfile
        self.valid = True
        self.writes += slots
        self.regfile_writes += 1
        return slots * self.write_energy_nj + self.e_reg_file_nj

    def store_cycles(self, n_blocks: int) -> int:
        return n_blocks * self.write_cycles

    def restore(self) -> tuple[list[BackupRecord], object, float, int]:
        """Hand back ``(records, regfile, energy_nj, cycles)`` and empty the region.

        An empty region means a cold start: nothing to reinstall, no cost.
        """
        if not self.valid:
            return [], None, 0.0, 0
        records, regfile = self.records, self.regfile
        self.records, self.regfile, self.valid = [], None, False
        self.reads += len(records)
        return records, regfile, len(records) * self.read_energy_nj, len(records) * self.read_cycles
