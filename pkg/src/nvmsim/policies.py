"""Dirty block table and its victim-selection policies.

The table is fully associative and keyed by L1 line id (``set * assoc + way``),
so ordering by line id is the lexicographic (set, way) order used for ties.

LFW keeps a saturating write counter per entry.  A write to an entry whose
counter is already at ``2**wc_bits - 1`` subtracts ``2**(wc_bits - 1)`` from
every entry (flooring at zero) instead of incrementing.

LRW keeps entries in write-recency order; an entry's rank is its position,
0 being the least recently written.
"""

from __future__ import annotations

from collections import OrderedDict
from operator import itemgetter
from typing import Iterator

from .config import LrwEvict, Policy


# (line, wc) items compared as (wc, line): lowest counter, ties to lowest line
_WC_THEN_LINE = itemgetter(1, 0)


class DirtyBlockTable:
    """M-entry table of dirty L1 lines with LFW or LRW victim selection."""

    def __init__(self, capacity: int, policy: Policy = Policy.LFW, wc_bits: int = 6,
                 lrw_evict: LrwEvict = LrwEvict.MOST_RECENT):
        self.capacity = capacity
        self.policy = Policy(policy)
        self.wc_bits = wc_bits
        self.lrw_evict = LrwEvict(lrw_evict)
        self.wc_max = (1 << wc_bits) - 1
        self.wc_half = 1 << (wc_bits - 1) if wc_bits > 0 else 0
        self.lfw = self.policy is Policy.LFW
        # LFW: line -> write counter.  LRW: line -> None, ordered oldest first.
        self.entries: OrderedDict[int, int | None] = OrderedDict()

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, line: int) -> bool:
        return line in self.entries

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.capacity

    def insert(self, line: int, counter: int = 1) -> None:
        """Track a newly dirtied line.  LFW entries start at one write."""
        assert line not in self.entries, f"line {line} already tracked"
        assert len(self.entries) < self.capacity, "DBT overflow"
        self.entries[line] = min(counter, self.wc_max) if self.lfw else None

    def remove(self, line: int) -> int | None:
        return self.entries.pop(line)

    def on_write(self, line: int) -> None:
        """Record another write to a tracked line."""
        if self.lfw:
            wc = self.entries[line]
            if wc >= self.wc_max:
                self.rescale()
            else:
                self.entries[line] = wc + 1
        else:
            self.entries.move_to_end(line)

    def rescale(self) -> None:
        half = self.wc_half
        for line, wc in self.entries.items():
            self.entries[line] = wc - half if wc > half else 0

    def select_victim(self) -> int:
        assert len(self.entries) == self.capacity, "replacement invoked on a non-full DBT"
        if self.lfw:
            return min(self.entries.items(), key=_WC_THEN_LINE)[0]
        if self.lrw_evict is LrwEvict.MOST_RECENT:
            return next(reversed(self.entries))
        return next(iter(self.entries))

    # inspection -------------------------------------------------------------

    def counter(self, line: int) -> int:
        """Write count (LFW) or recency rank (LRW) of a tracked line."""
        if self.lfw:
            return self.entries[line]
        for rank, other in enumerate(self.entries):
            if other == line:
                return rank
        raise KeyError(line)

    def counters(self) -> dict[int, int]:
        if self.lfw:
            return dict(self.entries)
        return {line: rank for rank, line in enumerate(self.entries)}

    def restore(self, items: list[tuple[int, int]]) -> None:
        """Rebuild from ``(line, counter)`` pairs taken before a power failure."""
        self.entries.clear()
        if self.lfw:
            for line, wc in items:
                self.entries[line] = wc
        else:
            for line, _ in sorted(items, key=lambda item: item[1]):
                self.entries[line] = None

    def clear(self) -> None:
        self.entries.clear()

