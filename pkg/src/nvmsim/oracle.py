"""Golden functional model for crash-consistency checks.

The oracle applies a trace's stores straight to a flat memory, with no
caches and no power failures.  Any simulator variant, whatever its failure
schedule, must end with the same architecturally visible memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .config import WORD_BYTES

_MASK32 = 0xFFFFFFFF


def store_value(addr: int, instr_index: int) -> int:
    """Deterministic, nonzero 32-bit payload for the store at ``addr``."""
    x = (addr * 0x9E3779B1) ^ (instr_index * 0x85EBCA77) ^ 0xA5A5A5A5
    x = ((x ^ (x >> 15)) * 0x2C1B3C6D) & _MASK32
    return (x ^ (x >> 13)) | 1


def word_address(addr: int) -> int:
    return addr & ~(WORD_BYTES - 1)


@dataclass
class OracleMemory:
    """Sparse byte-addressable memory; untouched bytes read as zero."""

    block_size: int = 64
    words: dict[int, int] = field(default_factory=dict)
    write_log: list[tuple[int, int, int]] | None = None

    def write(self, addr: int, instr_index: int) -> None:
        value = store_value(addr, instr_index)
        waddr = word_address(addr)
        self.words[waddr] = value
        if self.write_log is not None:
            self.write_log.append((instr_index, waddr, value))

    def read_word(self, addr: int) -> int:
        return self.words.get(word_address(addr), 0)

    def image(self) -> dict[int, bytes]:
        """Nonzero blocks keyed by block number."""
        shift = self.block_size.bit_length() - 1
        blocks: dict[int, bytearray] = {}
        for waddr, value in self.words.items():
            buf = blocks.get(waddr >> shift)
            if buf is None:
                buf = blocks[waddr >> shift] = bytearray(self.block_size)
            off = waddr & (self.block_size - 1)
            buf[off:off + WORD_BYTES] = value.to_bytes(WORD_BYTES, "little")
        return normalize_image(blocks)


def oracle_run(trace: Iterable[tuple[int, int, int]], block_size: int = 64,
               log: bool = False) -> dict[int, bytes]:
    mem = OracleMemory(block_size, write_log=[] if log else None)
    for kind, addr, instr in trace:
        if kind:
            mem.write(addr, instr)
    return mem.image()


def normalize_image(image: Mapping[int, bytes | bytearray]) -> dict[int, bytes]:
    """Drop all-zero blocks so sparse images compare by content alone."""
    return {b: bytes(d) for b, d in sorted(image.items()) if any(d)}


@dataclass(frozen=True)
class ConsistencyReport:
    passed: bool
    first_divergent_address: int | None = None
    divergent_blocks: int = 0
    expected: bytes | None = None
    actual: bytes | None = None

    def __bool__(self) -> bool:
        return self.passed


def check_consistency(sim_image: Mapping[int, bytes], oracle_image: Mapping[int, bytes],
                      block_size: int = 64) -> ConsistencyReport:
    """Byte-compare two block images; report the lowest differing byte address."""
    sim = normalize_image(sim_image)
    ref = normalize_image(oracle_image)
    zero = bytes(block_size)
    bad = sorted(b for b in sim.keys() | ref.keys() if sim.get(b, zero) != ref.get(b, zero))
    if not bad:
        return ConsistencyReport(True)
    block = bad[0]
    got, want = sim.get(block, zero), ref.get(block, zero)
    offset = next(i for i in range(block_size) if got[i] != want[i])
    return ConsistencyReport(False, block * block_size + offset, len(bad), want, got)
