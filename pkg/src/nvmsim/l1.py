"""SRAM L1 cache with a dirty block table (DBT) and writeback queue (WBQ).

Write-hit handling, for a write to clean line b when the DBT is enabled::

    b.dirty = 1
    if DBT holds M entries:
        victim = replacement policy's choice; it leaves the DBT
        if WBQ holds N entries: stall until the oldest writeback completes
        victim joins the WBQ tail
    b gets a DBT entry (counter 1)

A write to an already-dirty line bumps its DBT counter, or refreshes the data
snapshot of its WBQ entry.  Reads never touch the DBT or WBQ.  Together these
keep at most ``K = M + N`` dirty lines in the cache.

Misses are conventional: LRU victim, fill from the LLC.  A dirty victim leaves
through the WBQ and its tracking entry is retired.

Timing: the single LLC write port drains the WBQ in FIFO order, one
``sttram_write_cycles`` write at a time, starting when the enqueuing access
finishes.  An entry's line stays dirty until its write completes.
"""

from __future__ import annotations

from collections import OrderedDict, deque
from dataclasses import dataclass
from typing import NamedTuple

from .config import HierarchyConfig, WritePolicy, WORD_BYTES
from .memory import BackupRecord, LastLevelCache
from .policies import DirtyBlockTable


@dataclass(slots=True)
class WbqEntry:
    block: int
    set_index: int
    way: int
    resident: bool
    done: int
    data: bytes | None


class AccessOutcome(NamedTuple):
    hit: bool
    cycles: int
    stall_cycles: int
    llc_reads: int
    llc_writes: int


class L1Cache:
    def __init__(self, config: HierarchyConfig, llc: LastLevelCache, track_data: bool = False):
        self.config = config
        self.llc = llc
        self.track_data = track_data
        self.assoc = config.l1_assoc
        self.num_sets = config.l1_sets
        self.set_mask = self.num_sets - 1
        self.offset_bits = config.block_size_bytes.bit_length() - 1
        self.block_size = config.block_size_bytes
        self.read_cycles = config.sram_read_cycles
        self.write_cycles = config.sram_write_cycles
        self.llc_write_cycles = config.sttram_write_cycles
        self.write_back = config.write_policy is WritePolicy.WRITE_BACK
        self.k = config.k_max_dirty
        self.wbq_capacity = config.wbq_entries
        if self.write_back and config.dbt_enabled:
            self.dbt: DirtyBlockTable | None = DirtyBlockTable(
                config.dbt_entries, config.policy, config.wc_bits, config.lrw_evict)
        else:
            self.dbt = None
        nlines = self.num_sets * self.assoc
        self.sets: list[OrderedDict[int, int]] = []
        self.free: list[list[int]] = []
        self.line_block = [-1] * nlines
        self.dirty = bytearray(nlines)
        self.data: list[bytearray | None] = [None] * nlines
        self.ndirty = 0
        self.wbq: deque[WbqEntry] = deque()
        self.wbq_map: dict[int, WbqEntry] = {}
        self.port_free = 0
        self._reset_arrays()

        self.reads = self.writes = 0
        self.hits = self.misses = 0
        self.stall_cycles = 0
        self.wbq_full_stalls = 0
        self.peak_dirty = self.peak_dbt = self.peak_wbq = 0

    def _reset_arrays(self) -> None:
        self.sets = [OrderedDict() for _ in range(self.num_sets)]
        # pop() hands out way 0 first
        self.free = [list(range(self.assoc - 1, -1, -1)) for _ in range(self.num_sets)]
        n = len(self.line_block)
        self.line_block = [-1] * n
        self.dirty = bytearray(n)
        self.data = [None] * n
        self.ndirty = 0

    # hot path ----------------------------------------------------------------

    def access(self, write: bool, addr: int, value: int | None, now: int) -> int:
        """Perform one load or store starting at cycle ``now``; return its end cycle."""
        wbq = self.wbq
        if wbq and wbq[0].done <= now:
            self._retire_until(now)
        blk = addr >> self.offset_bits
        s = blk & self.set_mask
        ways = self.sets[s]
        way = ways.get(blk)
        if way is None:
            now, way = self._miss(blk, s, ways, now)
        else:
            self.hits += 1
            ways.move_to_end(blk)
        if not write:
            self.reads += 1
            return now + self.read_cycles
        self.writes += 1
        line = s * self.assoc + way
        if value is not None:
            off = addr & (self.block_size - 1) & ~(WORD_BYTES - 1)
            self.data[line][off:off + WORD_BYTES] = value.to_bytes(WORD_BYTES, "little")
        if not self.write_back:
            data = bytes(self.data[line]) if value is not None else None
            return self._blocking_write(blk, data, now + self.write_cycles)
        dbt = self.dbt
        if self.dirty[line]:
            if dbt is not None:
                if line in dbt.entries:
                    dbt.on_write(line)
                elif value is not None:
                    self.wbq_map[blk].data = bytes(self.data[line])
            return now + self.write_cycles
        if dbt is None:
            end = now + self.write_cycles
        else:
            entries = dbt.entries
            if len(entries) >= dbt.capacity:
                victim = dbt.select_victim()
                del entries[victim]
                if self.wbq_capacity == 0:
                    now = self._write_line_blocking(victim, now)
                    end = now + self.write_cycles
                else:
                    if len(wbq) >= self.wbq_capacity:
                        now = self._stall_for_slot(now)
                    end = now + self.write_cycles
                    self._enqueue_line(victim, end)
            else:
                end = now + self.write_cycles
                if len(entries) >= self.peak_dbt:
                    self.peak_dbt = len(entries) + 1
            # a fresh entry has seen one write
            entries[line] = 1 if dbt.lfw else None
        # marked only after a WBQ slot is secured, so the bound holds at every step
        self.dirty[line] = 1
        self.ndirty += 1
        if self.ndirty > self.peak_dirty:
            self.peak_dirty = self.ndirty
        return end

    # miss path -----------------------------------------------------------------

    def _miss(self, blk: int, s: int, ways: OrderedDict[int, int], now: int) -> tuple[int, int]:
        self.misses += 1
        if blk in self.wbq_map:
            # the block's latest data is still on its way to the LLC
            now = self._wait_for(self.wbq_map[blk], now)
        if len(ways) >= self.assoc:
            victim_blk, way = ways.popitem(last=False)
            line = s * self.assoc + way
            if self.dirty[line]:
                now = self._evict_dirty(victim_blk, s, way, line, now)
        else:
            way = self.free[s].pop()
            line = s * self.assoc + way
        cycles, data = self.llc.read(blk)
        ways[blk] = way
        self.line_block[line] = blk
        if data is not None:
            self.data[line] = bytearray(data)
        return now + cycles, way

    def _evict_dirty(self, blk: int, s: int, way: int, line: int, now: int) -> int:
        dbt = self.dbt
        data = bytes(self.data[line]) if self.track_data else None
        if dbt is None:
            now = self._blocking_write(blk, data, now)
        elif line in dbt.entries:
            dbt.remove(line)
            if self.wbq_capacity == 0:
                now = self._blocking_write(blk, data, now)
            else:
                if len(self.wbq) >= self.wbq_capacity:
                    now = self._stall_for_slot(now)
                self._push(WbqEntry(blk, s, way, False, 0, data), now)
        else:
            self.wbq_map[blk].resident = False
        self.dirty[line] = 0
        self.ndirty -= 1
        return now

    # writeback machinery -------------------------------------------------------

    def _enqueue_line(self, line: int, start: int) -> None:
        s, way = divmod(line, self.assoc)
        data = bytes(self.data[line]) if self.track_data else None
        self._push(WbqEntry(self.line_block[line], s, way, True, 0, data), start)

    def _push(self, entry: WbqEntry, start: int) -> None:
        port = self.port_free
        entry.done = self.port_free = (start if start > port else port) + self.llc_write_cycles
        wbq = self.wbq
        wbq.append(entry)
        self.wbq_map[entry.block] = entry
        if len(wbq) > self.peak_wbq:
            self.peak_wbq = len(wbq)

    def _retire_until(self, now: int) -> None:
        wbq = self.wbq
        while wbq and wbq[0].done <= now:
            self._retire(wbq.popleft())

    def _retire(self, entry: WbqEntry) -> None:
        del self.wbq_map[entry.block]
        self.llc.write(entry.block, entry.data)
        if entry.resident:
            line = entry.set_index * self.assoc + entry.way
            # cleared only once the LLC holds the data
            self.dirty[line] = 0
            self.ndirty -= 1

    def _stall(self, until: int, now: int) -> int:
        if until > now:
            self.stall_cycles += until - now
            return until
        return now

    def _stall_for_slot(self, now: int) -> int:
        self.wbq_full_stalls += 1
        now = self._stall(self.wbq[0].done, now)
        self._retire_until(now)
        return now

    def _wait_for(self, entry: WbqEntry, now: int) -> int:
        now = self._stall(entry.done, now)
        self._retire_until(now)
        return now

    def _blocking_write(self, blk: int, data: bytes | None, now: int) -> int:
        """Write a block to the LLC with the processor waiting for completion."""
        begin = now if now > self.port_free else self.port_free
        done = self.port_free = begin + self.llc.write(blk, data)
        self.stall_cycles += done - now
        return done

    def _write_line_blocking(self, line: int, now: int) -> int:
        data = bytes(self.data[line]) if self.track_data else None
        now = self._blocking_write(self.line_block[line], data, now)
        self.dirty[line] = 0
        self.ndirty -= 1
        return now

    def drain(self, now: int) -> int:
        """Let every queued writeback complete; return the cycle the last one ends."""
        if self.wbq:
            now = max(now, self.wbq[-1].done)
            self._retire_until(now)
        return now

    # introspection -----------------------------------------------------------

    def access_outcome(self, write: bool, addr: int, value: int | None, now: int) -> tuple[int, AccessOutcome]:
        """Like :meth:`access`, also reporting hit/miss, stalls and LLC traffic."""
        hits, stalls = self.hits, self.stall_cycles
        llc_r, llc_w = self.llc.reads, self.llc.writes
        end = self.access(write, addr, value, now)
        return end, AccessOutcome(self.hits > hits, end - now, self.stall_cycles - stalls,
                                  self.llc.reads - llc_r, self.llc.writes - llc_w)

    def contains(self, addr: int) -> bool:
        blk = addr >> self.offset_bits
        return blk in self.sets[blk & self.set_mask]

    def line_of(self, addr: int) -> int | None:
        blk = addr >> self.offset_bits
        s = blk & self.set_mask
        way = self.sets[s].get(blk)
        return None if way is None else s * self.assoc + way

    def is_dirty(self, addr: int) -> bool:
        line = self.line_of(addr)
        return line is not None and bool(self.dirty[line])

    def dirty_lines(self) -> list[int]:
        return [i for i, d in enumerate(self.dirty) if d]

    def check_invariants(self) -> None:
        """Assert the structural invariants of the dirty-block bound."""
        dirty = set(self.dirty_lines())
        assert len(dirty) == self.ndirty, (len(dirty), self.ndirty)
        if not self.write_back:
            assert self.ndirty == 0, "write-through L1 holds dirty lines"
        if self.dbt is None:
            assert not self.wbq
            return
        assert len(self.dbt) <= self.dbt.capacity
        assert len(self.wbq) <= self.wbq_capacity
        assert self.ndirty <= self.k
        tracked_dbt = set(self.dbt)
        resident = {e.set_index * self.assoc + e.way for e in self.wbq if e.resident}
        assert len(resident) == sum(e.resident for e in self.wbq), "duplicate (set, way) in WBQ"
        assert not tracked_dbt & resident, "line tracked by both DBT and WBQ"
        assert dirty == tracked_dbt | resident, "dirty lines and DBT/WBQ tracking disagree"
        for e in self.wbq:
            if e.resident:
                assert self.line_block[e.set_index * self.assoc + e.way] == e.block
        if self.dbt.lfw:
            assert all(0 <= wc <= self.dbt.wc_max for wc in self.dbt.entries.values())

    # power failure support -----------------------------------------------------

    def backup_set(self) -> list[BackupRecord]:
        """Every dirty block exactly once: DBT-tracked lines, then WBQ entries in FIFO order."""
        out = []
        if self.dbt is None:
            for line in self.dirty_lines():
                s, way = divmod(line, self.assoc)
                data = bytes(self.data[line]) if self.track_data else None
                out.append(BackupRecord("line", self.line_block[line], s, way, 0, True, data))
            return out
        for line, counter in self.dbt.counters().items():
            s, way = divmod(line, self.assoc)
            data = bytes(self.data[line]) if self.track_data else None
            out.append(BackupRecord("dbt", self.line_block[line], s, way, counter, True, data))
        for e in self.wbq:
            out.append(BackupRecord("wbq", e.block, e.set_index, e.way, 0, e.resident, e.data))
        return out

    def power_off(self, now: int) -> None:
        """Lose all volatile state."""
        self._reset_arrays()
        if self.dbt is not None:
            self.dbt.clear()
        self.wbq.clear()
        self.wbq_map.clear()
        self.port_free = now

    def reinstall(self, records: list[BackupRecord], now: int) -> None:
        """Put checkpointed blocks back, dirty, with their DBT/WBQ tracking."""
        dbt_items = []
        for r in records:
            if r.origin == "wbq" and not r.resident:
                self._push(WbqEntry(r.block, r.set_index, r.way, False, 0, r.data), now)
                continue
            line = r.set_index * self.assoc + r.way
            assert self.line_block[line] == -1, f"restore collision at set {r.set_index} way {r.way}"
            self.free[r.set_index].remove(r.way)
            self.sets[r.set_index][r.block] = r.way
            self.line_block[line] = r.block
            self.dirty[line] = 1
            self.ndirty += 1
            if self.track_data:
                self.data[line] = bytearray(r.data)
            if r.origin == "dbt":
                dbt_items.append((line, r.counter))
            elif r.origin == "wbq":
                self._push(WbqEntry(r.block, r.set_index, r.way, True, 0, r.data), now)
        if self.dbt is not None:
            self.dbt.restore(dbt_items)
            self.peak_dbt = max(self.peak_dbt, len(self.dbt))
        self.peak_dirty = max(self.peak_dirty, self.ndirty)
