"""Trace-driven simulation loop with power-failure injection.

At each scheduled failure the dirty L1 blocks (plus the register file) are
checkpointed under the capacitor budget, every volatile structure is lost,
and execution resumes after the restore protocol.  Three checkpoint targets
exist:

* backup region (BR): the dirty blocks go to a dedicated STT-RAM region and
  come back into L1, still dirty, at power-on;
* no BR: the dirty blocks are written into the LLC like ordinary writebacks,
  possibly pushing dirty LLC victims to PCM; power-on is a cold L1;
* volatile LLC: L1 and LLC dirty contents both go to PCM.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .config import ConfigError, HierarchyConfig, TraceError, derive_k, within_budget
from .l1 import L1Cache
from .memory import BackupRegion, LastLevelCache, MainMemory
from .oracle import normalize_image, store_value
from .stats import Counts, EnergyLedger, SimStats

_NEVER = math.inf


class UnsafeBackupError(RuntimeError):
    """A checkpoint needed more energy than the capacitor holds."""

    def __init__(self, failure_index: int, energy_nj: float, budget_nj: float, blocks: int):
        self.failure_index = failure_index
        self.energy_nj = energy_nj
        self.budget_nj = budget_nj
        self.blocks = blocks
        super().__init__(
            f"unsafe backup at failure #{failure_index}: {blocks} dirty blocks need "
            f"{energy_nj:.3f} nJ, capacitor holds {budget_nj:.3f} nJ"
        )


@dataclass(frozen=True)
class PowerSchedule:
    """When power fails, in instruction indices.

    ``every`` gives periodic failures at every, 2*every, ...; ``points`` an
    explicit strictly increasing list.  Neither means stable power.
    """

    every: int | None = None
    points: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.every is not None and self.points:
            raise ConfigError("a schedule is either periodic or an explicit list")
        if self.every is not None and self.every <= 0:
            raise ConfigError("failure interval must be positive")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ConfigError("explicit failure points must be strictly increasing")

    @classmethod
    def none(cls) -> "PowerSchedule":
        return cls()

    @classmethod
    def periodic(cls, every: int) -> "PowerSchedule":
        return cls(every=int(every))

    @classmethod
    def explicit(cls, points: Iterable[int]) -> "PowerSchedule":
        return cls(points=tuple(int(p) for p in points))

    @classmethod
    def evenly(cls, total_instructions: int, count: int) -> "PowerSchedule":
        """Exactly ``count`` failures spread over instructions ``[1, total)``."""
        if count < 0:
            raise ConfigError("failure count must be nonnegative")
        if count and total_instructions <= count:
            raise ConfigError(f"{count} failures do not fit in {total_instructions} instructions")
        return cls(points=tuple(j * total_instructions // (count + 1) for j in range(1, count + 1)))

    @property
    def mode(self) -> str:
        if self.every is not None:
            return "periodic"
        return "explicit" if self.points else "none"

    def failure_points(self) -> Iterator[int]:
        if self.every is not None:
            at = self.every
            while True:
                yield at
                at += self.every
        else:
            yield from self.points

    def describe(self) -> str:
        if self.every is not None:
            return f"every {self.every} instructions"
        if self.points:
            return f"{len(self.points)} failures"
        return "stable power"


@dataclass(frozen=True)
class Capacitor:
    e_capacitor_nj: float
    e_reg_file_nj: float

    def blocks(self, e_w_sttram_nj: float) -> int:
        return derive_k(self.e_capacitor_nj, self.e_reg_file_nj, e_w_sttram_nj)

    def affords(self, energy_nj: float) -> bool:
        return within_budget(energy_nj, self.e_capacitor_nj)


class Simulator:
    """One memory hierarchy instance; feed it records with :meth:`run`."""

    def __init__(self, config: HierarchyConfig, track_data: bool = False):
        config.validate()
        self.config = config
        self.track_data = track_data
        self.pcm = MainMemory(config, track_data)
        self.llc = LastLevelCache(config, self.pcm, track_data)
        self.l1 = L1Cache(config, self.llc, track_data)
        self.br = BackupRegion.for_config(config) if config.br_enabled and not config.llc_volatile else None
        self.capacitor = Capacitor(config.e_capacitor_nj, config.e_reg_file_nj)
        self.ledger = EnergyLedger(config)
        self.now = 0
        self.last_instr = -1
        self.accesses = 0
        self.regfile: dict[str, int] = {"instr_index": -1}
        self.regfile_writes = 0
        self.failures = 0
        self.blocks_backed_up = 0
        self.unsafe_backups = 0
        self.backup_cycles = 0
        self.restore_cycles = 0
        self.backup_counts = Counts()
        self.restore_counts = Counts()
        self.backup_energies: list[float] = []

    # main loop ---------------------------------------------------------------

    def run(self, trace: Iterable[tuple[int, int, int]], schedule: PowerSchedule | None = None,
            audit_every: int = 0) -> SimStats:
        """Simulate every record of ``trace`` in order and return the statistics.

        ``audit_every`` > 0 re-checks the full L1 invariants every that many
        accesses (slow; meant for tests).
        """
        points = schedule.failure_points() if schedule is not None else iter(())
        next_fail = next(points, _NEVER)
        access = self.l1.access
        now, last = self.now, self.last_instr
        mem_size = self.config.mem_size_bytes
        wrap = self.config.allow_address_wrap
        track = self.track_data
        n = self.accesses
        for kind, addr, instr in trace:
            if instr >= next_fail:
                self.now, self.last_instr = now, last
                while instr >= next_fail:
                    self.power_failure(next_fail)
                    next_fail = next(points, _NEVER)
                now = self.now
            if instr < last:
                raise TraceError(f"record {n}: instruction index {instr} goes backwards (previous {last})")
            if not 0 <= addr < mem_size:
                if not wrap:
                    raise TraceError(f"record {n}: address {addr:#x} outside {mem_size}-byte memory")
                addr %= mem_size
            if instr > last + 1:
                now += instr - last - 1
            last = instr
            now = access(kind, addr, store_value(addr, instr) if kind and track else None, now)
            n += 1
            if audit_every and n % audit_every == 0:
                self.l1.check_invariants()
        self.now, self.last_instr, self.accesses = now, last, n
        self.regfile["instr_index"] = last
        return self.stats()

    def run_arrays(self, kinds: np.ndarray, addrs: np.ndarray, instrs: np.ndarray,
                   schedule: PowerSchedule | None = None) -> SimStats:
        """Same result as :meth:`run` on the zipped arrays, with validation vectorized."""
        n = len(kinds)
        if n == 0:
            if not len(addrs) == len(instrs) == 0:
                raise TraceError("kind, address and instruction arrays differ in length")
            return self.stats()
        addrs, instrs, prev = check_arrays(self.config, kinds, addrs, instrs, self.last_instr, self.accesses)
        if self.track_data:
            return self.run(zip(kinds.tolist(), addrs.tolist(), instrs.tolist()), schedule)
        gaps = np.maximum(instrs - prev - 1, 0)
        # split points: first record at or past each failure instruction
        bounds = []
        if schedule is not None:
            last_instr = int(instrs[-1])
            for point in schedule.failure_points():
                if point > last_instr:
                    break
                bounds.append((int(np.searchsorted(instrs, point, side="left")), point))
        access = self.l1.access
        k_list, a_list, g_list = kinds.tolist(), addrs.tolist(), gaps.tolist()
        start = 0
        for stop, point in bounds + [(n, None)]:
            now = self.now
            for k, a, g in zip(k_list[start:stop], a_list[start:stop], g_list[start:stop]):
                now = access(k, a, None, now + g)
            self.now = now
            if stop > start:
                self.last_instr = int(instrs[stop - 1])
            self.accesses += stop - start
            start = stop
            if point is not None:
                self.power_failure(point)
        self.regfile["instr_index"] = self.last_instr
        return self.stats()

    # power failure protocol -------------------------------------------------

    def counts(self) -> Counts:
        l1, llc, pcm, br = self.l1, self.llc, self.pcm, self.br
        return Counts(
            l1.reads, l1.writes, llc.reads, llc.writes, pcm.reads, pcm.writes,
            br.reads if br else 0, br.writes if br else 0,
            self.regfile_writes + (br.regfile_writes if br else 0),
        )

    def power_failure(self, at_instr: int | None = None) -> None:
        self.regfile["instr_index"] = self.last_instr if at_instr is None else at_instr
        self.do_backup()
        self.l1.power_off(self.now)
        self.do_restore()

    def do_backup(self) -> float:
        """Checkpoint the dirty L1 state; returns the energy it took (nJ)."""
        cfg = self.config
        index = self.failures
        before = self.counts()
        records = self.l1.backup_set()
        regfile = dict(self.regfile)
        if cfg.llc_volatile:
            # LLC first: its copy of a block may be older than the L1's
            self.llc.flush_and_invalidate()
            for r in records:
                self.pcm.write(r.block, r.data)
            self.regfile_writes += 1
            cycles = 0
        elif self.br is not None:
            if len(records) > self.br.capacity:
                # only reachable when the dirty bound is off
                energy = self.ledger.energy(Counts(br_writes=len(records), regfile_writes=1))
                raise UnsafeBackupError(index, energy, cfg.e_capacitor_nj, len(records))
            pad = self.br.capacity if cfg.br_fixed_image else 0
            self.br.store(records, regfile, pad)
            cycles = self.br.store_cycles(max(pad, len(records)))
        else:
            cycles = sum(self.llc.write(r.block, r.data) for r in records)
            self.regfile_writes += 1
        delta = self.counts() - before
        energy = self.ledger.energy(delta)
        self.failures += 1
        self.blocks_backed_up += len(records)
        self.backup_cycles += cycles
        self.backup_counts = self.backup_counts + delta
        self.backup_energies.append(energy)
        if not self.capacitor.affords(energy):
            self.unsafe_backups += 1
            if cfg.strict_capacitor:
                raise UnsafeBackupError(index, energy, cfg.e_capacitor_nj, len(records))
        return energy

    def do_restore(self) -> float:
        """Power-on: reinstall the checkpoint (BR) or start with a cold L1."""
        before = self.counts()
        if self.br is not None:
            records, regfile, _, cycles = self.br.restore()
            self.now += cycles
            self.restore_cycles += cycles
            self.l1.reinstall(records, self.now)
        delta = self.counts() - before
        self.restore_counts = self.restore_counts + delta
        return self.ledger.energy(delta)

    # results -----------------------------------------------------------------

    def stats(self) -> SimStats:
        total = self.counts()
        stable = total - self.backup_counts - self.restore_counts
        e_stable = self.ledger.energy(stable)
        e_backup = self.ledger.energy(self.backup_counts)
        e_restore = self.ledger.energy(self.restore_counts)
        l1, llc = self.l1, self.llc
        return SimStats(
            instructions=self.last_instr + 1,
            accesses=self.accesses,
            l1_reads=total.l1_reads, l1_writes=total.l1_writes,
            l1_hits=l1.hits, l1_misses=l1.misses,
            llc_reads=total.llc_reads, llc_writes=total.llc_writes,
            llc_hits=llc.hits, llc_misses=llc.misses,
            pcm_reads=total.pcm_reads, pcm_writes=total.pcm_writes,
            br_reads=total.br_reads, br_writes=total.br_writes,
            stall_cycles=l1.stall_cycles, wbq_full_stalls=l1.wbq_full_stalls,
            total_cycles=self.now,
            backup_cycles=self.backup_cycles, restore_cycles=self.restore_cycles,
            stable_energy_nj=e_stable, backup_energy_nj=e_backup, restore_energy_nj=e_restore,
            total_energy_nj=e_stable + e_backup + e_restore,
            backups_performed=self.failures,
            blocks_backed_up=self.blocks_backed_up,
            unsafe_backups=self.unsafe_backups,
            backup_energy_min_nj=min(self.backup_energies, default=0.0),
            backup_energy_max_nj=max(self.backup_energies, default=0.0),
            peak_dirty=l1.peak_dirty, peak_dbt=l1.peak_dbt, peak_wbq=l1.peak_wbq,
        )

    def memory_image(self) -> dict[int, bytes]:
        """Architecturally visible memory: PCM overlaid by LLC, BR, WBQ, then L1 dirty data."""
        if not self.track_data:
            raise RuntimeError("memory_image needs a simulator built with track_data=True")
        image: dict[int, bytes] = dict(self.pcm.blocks)
        image.update(self.llc.dirty_blocks())
        if self.br is not None and self.br.valid:
            for r in self.br.records:
                image[r.block] = r.data
        for e in self.l1.wbq:
            image[e.block] = e.data
        for line in self.l1.dirty_lines():
            image[self.l1.line_block[line]] = bytes(self.l1.data[line])
        return normalize_image(image)


def check_arrays(config: HierarchyConfig, kinds: np.ndarray, addrs: np.ndarray, instrs: np.ndarray,
                 last_instr: int = -1, first_record: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Validate a columnar trace; returns int64 ``(addrs, instrs, previous instrs)``, addresses wrapped if allowed."""
    n = len(kinds)
    if not len(addrs) == len(instrs) == n:
        raise TraceError("kind, address and instruction arrays differ in length")
    instrs = np.asarray(instrs, dtype=np.int64)
    addrs = np.asarray(addrs, dtype=np.int64)
    prev = np.concatenate(([last_instr], instrs[:-1]))
    back = np.flatnonzero(instrs < prev)
    if back.size:
        i = int(back[0])
        raise TraceError(f"record {first_record + i}: instruction index {instrs[i]} goes backwards")
    mem_size = config.mem_size_bytes
    bad = np.flatnonzero((addrs < 0) | (addrs >= mem_size))
    if bad.size:
        if not config.allow_address_wrap:
            i = int(bad[0])
            raise TraceError(f"record {first_record + i}: address {int(addrs[i]):#x} "
                             f"outside {mem_size}-byte memory")
        addrs = addrs % mem_size
    return addrs, instrs, prev


def failure_points(schedule: PowerSchedule | None, last_instr: int) -> np.ndarray:
    """The schedule's failure instructions that fall at or before ``last_instr``."""
    if schedule is None:
        return np.zeros(0, dtype=np.int64)
    if schedule.every is not None:
        return np.arange(schedule.every, last_instr + 1, schedule.every, dtype=np.int64)
    points = np.asarray(schedule.points, dtype=np.int64)
    return points[points <= last_instr]


def simulate_arrays(config: HierarchyConfig, kinds: np.ndarray, addrs: np.ndarray, instrs: np.ndarray,
                    schedule: PowerSchedule | None = None, compiled: bool = True) -> SimStats:
    """One fresh counts-only run over a columnar trace.

    ``compiled`` uses the array kernel, otherwise the object model; both give
    identical statistics.
    """
    config.validate()
    if not compiled:
        return Simulator(config).run_arrays(kinds, addrs, instrs, schedule)
    from .kernel import KernelRun
    return KernelRun(config, schedule).feed(kinds, addrs, instrs).stats()


def simulate_stream(config: HierarchyConfig, trace: Iterable[tuple[int, int, int]],
                    schedule: PowerSchedule | None = None, chunk: int = 1 << 16) -> SimStats:
    """Counts-only run over a record stream, fed to the kernel in bounded chunks."""
    from .kernel import KernelRun
    config.validate()
    run_ = KernelRun(config, schedule)
    it = iter(trace)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return run_.stats()
        kinds, addrs, instrs = zip(*block)
        run_.feed(np.array(kinds, dtype=np.int64), np.array(addrs, dtype=np.int64),
                  np.array(instrs, dtype=np.int64))


def run(trace: Iterable[tuple[int, int, int]], config: HierarchyConfig,
        schedule: PowerSchedule | None = None, track_data: bool = False) -> SimStats:
    return Simulator(config, track_data).run(trace, schedule)
