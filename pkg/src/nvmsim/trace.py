"""Memory-access traces: text (.mtr) and packed binary (.mtb) formats, plus
seeded synthetic workload generators.

Text format, one record per line, ``#`` starts a comment::

    # mtr version=1 address_bits=32 records=2
    R 0x00001040 7
    W 0x00001044

The header comment is optional; when present its record count is checked.
A missing instruction index defaults to ``ordinal / mem_ops_per_instruction``.

Binary format, little-endian.  A 16-byte header::

    offset 0  4s  magic b"MTRB"
    offset 4  u16 version (1)
    offset 6  u16 address bits
    offset 8  u64 record count

followed by 17-byte records ``u8 kind (0 read, 1 write), u64 address,
u64 instruction index``.
"""

from __future__ import annotations

import enum
import io
import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, NamedTuple, TextIO, Union

import numpy as np

from .config import TraceError, WORD_BYTES

MAGIC = b"MTRB"
VERSION = 1
HEADER = struct.Struct("<4sHHQ")
RECORD = struct.Struct("<BQQ")
TEXT_SUFFIX = ".mtr"
BINARY_SUFFIX = ".mtb"


class Kind(enum.IntEnum):
    READ = 0
    WRITE = 1


class AccessRecord(NamedTuple):
    kind: Kind
    address: int
    instr_index: int


@dataclass(frozen=True)
class TraceHeader:
    version: int = VERSION
    address_bits: int = 32
    record_count: int | None = None


_HEADER_RE = re.compile(r"#\s*mtr\b(.*)")
_KINDS = {"R": Kind.READ, "W": Kind.WRITE}


# parsing ----------------------------------------------------------------------

def parse_text(lines: Iterable[str], mem_size: int | None = None,
               mem_ops_per_instruction: float = 0.4) -> Iterator[AccessRecord]:
    """Stream records from text lines.  Errors name the 1-based line number."""
    header = None
    ordinal = 0
    last = -1
    lineno = 0
    for lineno, raw in enumerate(lines, 1):
        m = _HEADER_RE.match(raw.strip())
        if m and ordinal == 0 and header is None:
            header = _parse_text_header(m.group(1), lineno)
            continue
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) not in (2, 3) or line[0].upper() not in _KINDS:
            raise TraceError(f"line {lineno}: malformed record {raw.strip()!r}")
        try:
            addr = int(line[1], 16)
            instr = int(line[2], 0) if len(line) == 3 else int(ordinal / mem_ops_per_instruction)
        except ValueError:
            raise TraceError(f"line {lineno}: malformed record {raw.strip()!r}") from None
        if addr < 0 or (mem_size is not None and addr >= mem_size):
            raise TraceError(f"line {lineno}: address {addr:#x} out of range")
        if instr < last:
            raise TraceError(f"line {lineno}: instruction index {instr} goes backwards")
        last = instr
        ordinal += 1
        yield AccessRecord(_KINDS[line[0].upper()], addr, instr)
    if header is not None and header.record_count is not None and header.record_count != ordinal:
        raise TraceError(f"line {lineno}: header promises {header.record_count} records, found {ordinal}")


def _parse_text_header(rest: str, lineno: int) -> TraceHeader:
    fields = {}
    for token in rest.split():
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        version = int(fields.get("version", VERSION))
        bits = int(fields.get("address_bits", 32))
        count = int(fields["records"]) if "records" in fields else None
    except ValueError:
        raise TraceError(f"line {lineno}: bad trace header") from None
    if version != VERSION:
        raise TraceError(f"line {lineno}: unsupported trace version {version}")
    return TraceHeader(version, bits, count)


def read_binary_header(stream: BinaryIO) -> TraceHeader:
    raw = stream.read(HEADER.size)
    if len(raw) != HEADER.size:
        raise TraceError("binary trace: truncated header")
    magic, version, bits, count = HEADER.unpack(raw)
    if magic != MAGIC:
        raise TraceError(f"binary trace: bad magic {magic!r}")
    if version != VERSION:
        raise TraceError(f"binary trace: unsupported version {version}")
    return TraceHeader(version, bits, count)


def parse_binary(stream: BinaryIO, mem_size: int | None = None) -> Iterator[AccessRecord]:
    header = read_binary_header(stream)
    last = -1
    chunk_records = 4096
    seen = 0
    while True:
        buf = stream.read(RECORD.size * chunk_records)
        if not buf:
            break
        if len(buf) % RECORD.size:
            raise TraceError(f"binary trace: truncated record {seen + len(buf) // RECORD.size}")
        for kind, addr, instr in RECORD.iter_unpack(buf):
            if kind > 1:
                raise TraceError(f"binary trace: record {seen}: bad kind {kind}")
            if mem_size is not None and addr >= mem_size:
                raise TraceError(f"binary trace: record {seen}: address {addr:#x} out of range")
            if instr < last:
                raise TraceError(f"binary trace: record {seen}: instruction index goes backwards")
            last = instr
            seen += 1
            yield AccessRecord(Kind(kind), addr, instr)
    if seen != header.record_count:
        raise TraceError(f"binary trace: header promises {header.record_count} records, found {seen}")


PathLike = Union[str, "os.PathLike[str]"]


def parse_trace(source: PathLike | TextIO | BinaryIO, mem_size: int | None = None,
                mem_ops_per_instruction: float = 0.4) -> Iterator[AccessRecord]:
    """Stream records from a path or open file; the format is sniffed from the magic."""
    if isinstance(source, (str, os.PathLike)):
        return _parse_path(Path(source), mem_size, mem_ops_per_instruction)
    if isinstance(source, io.TextIOBase):
        return parse_text(source, mem_size, mem_ops_per_instruction)
    return parse_binary(source, mem_size)


def _parse_path(path: Path, mem_size: int | None, ratio: float) -> Iterator[AccessRecord]:
    try:
        with path.open("rb") as fh:
            binary = fh.read(len(MAGIC)) == MAGIC
    except OSError as exc:
        raise TraceError(f"cannot read trace {path}: {exc}") from exc
    if binary:
        with path.open("rb") as fh:
            yield from parse_binary(fh, mem_size)
    else:
        with path.open("r") as fh:
            yield from parse_text(fh, mem_size, ratio)


# serialization ---------------------------------------------------------------

def format_text(records: Iterable[tuple[int, int, int]], header: bool = True) -> str:
    records = list(records)
    out = io.StringIO()
    if header:
        out.write(f"# mtr version={VERSION} address_bits=32 records={len(records)}\n")
    for kind, addr, instr in records:
        out.write(f"{'W' if kind else 'R'} {addr:#010x} {instr}\n")
    return out.getvalue()


def pack_binary(records: Iterable[tuple[int, int, int]], address_bits: int = 32) -> bytes:
    records = list(records)
    body = b"".join(RECORD.pack(int(k), a, i) for k, a, i in records)
    return HEADER.pack(MAGIC, VERSION, address_bits, len(records)) + body


def write_trace(path: PathLike, records: Iterable[tuple[int, int, int]]) -> Path:
    """Write ``.mtb`` as packed binary, anything else as text."""
    path = Path(path)
    if path.suffix == BINARY_SUFFIX:
        path.write_bytes(pack_binary(records))
    else:
        path.write_text(format_text(records))
    return path


def trace_extent(path: PathLike, mem_ops_per_instruction: float = 0.4) -> tuple[int, int]:
    """``(record_count, instruction_count)`` of a trace file, by streaming it once."""
    n, last = 0, -1
    for _, _, instr in parse_trace(path, mem_ops_per_instruction=mem_ops_per_instruction):
        n += 1
        last = instr
    return n, last + 1


# synthetic workloads ------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    def __str__(self) -> str:
        return "uniform"


@dataclass(frozen=True)
class Zipf:
    s: float = 1.0

    def __str__(self) -> str:
        return f"zipf:{self.s:g}"


@dataclass(frozen=True)
class Strided:
    stride: int = 64

    def __str__(self) -> str:
        return f"strided:{self.stride}"


@dataclass(frozen=True)
class LoopNest:
    """Arrays of the given byte sizes, laid out back to back and walked in lock step."""

    sizes: tuple[int, ...] = (4096, 4096, 4096)

    def __str__(self) -> str:
        return "loopnest:" + "x".join(str(s) for s in self.sizes)


@dataclass(frozen=True)
class Hotspot:
    """A small, frequently read hot region inside a large working set.

    ``fraction`` of accesses go to the first ``hot_bytes`` of the working set;
    the rest are uniform over all of it, storing with the generator's
    ``write_fraction``.  Hot stores come in bursts: the stream is cut into
    ``window``-access windows, a window carries stores with probability
    ``store_windows``, and then half of its hot accesses store to one block.
    """

    hot_bytes: int = 512
    fraction: float = 0.2
    window: int = 64
    store_windows: float = 0.12

    def __str__(self) -> str:
        return f"hotspot:{self.hot_bytes}:{self.fraction:g}:{self.window}:{self.store_windows:g}"


Locality = Union[Uniform, Zipf, Strided, LoopNest, Hotspot]


def parse_locality(text: str) -> Locality:
    """``uniform``, ``zipf:1.2``, ``strided:256``, ``loopnest:4096x4096`` or
    ``hotspot:512:0.2:64:0.12``."""
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name == "uniform":
            return Uniform()
        if name == "zipf":
            return Zipf(float(arg or 1.0))
        if name == "strided":
            return Strided(int(arg or 64, 0))
        if name == "loopnest":
            return LoopNest(tuple(int(x, 0) for x in arg.split("x")) if arg else LoopNest().sizes)
        if name == "hotspot":
            parts = [p for p in arg.split(":") if p] if arg else []
            casts = (int, float, int, float)
            return Hotspot(*(cast(p) for cast, p in zip(casts, parts)))
    except ValueError:
        pass
    raise TraceError(f"unknown locality {text!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    record_count: int
    write_fraction: float = 0.3
    working_set_bytes: int = 1 << 20
    locality: Locality = Uniform()
    seed: int = 0
    base_address: int = 0
    mem_ops_per_instruction: float = 0.4
    block_size_bytes: int = 64

    def validate(self, mem_size: int | None = None) -> None:
        if self.record_count < 0:
            raise TraceError("record_count must be nonnegative")
        if not 0.0 <= self.write_fraction <= 1.0:
            raise TraceError("write_fraction must be in [0, 1]")
        if self.working_set_bytes < self.block_size_bytes:
            raise TraceError("working set smaller than one block")
        if mem_size is not None and self.base_address + self._footprint() > mem_size:
            raise TraceError("working set does not fit in memory")

    def _footprint(self) -> int:
        if isinstance(self.locality, LoopNest):
            return sum(self.locality.sizes)
        return self.working_set_bytes


def generate_arrays(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kinds (uint8), word-aligned addresses and instruction indices (int64)."""
    spec.validate()
    n = spec.record_count
    rng = np.random.default_rng(spec.seed)
    kinds = (rng.random(n) < spec.write_fraction).astype(np.uint8)
    words = spec.working_set_bytes // WORD_BYTES
    loc = spec.locality
    if isinstance(loc, Uniform):
        offsets = rng.integers(0, words, n, dtype=np.int64) * WORD_BYTES
    elif isinstance(loc, Zipf):
        nblocks = spec.working_set_bytes // spec.block_size_bytes
        weights = 1.0 / np.arange(1, nblocks + 1, dtype=np.float64) ** loc.s
        ranks = rng.choice(nblocks, size=n, p=weights / weights.sum())
        placement = rng.permutation(nblocks).astype(np.int64)
        within = rng.integers(0, spec.block_size_bytes // WORD_BYTES, n, dtype=np.int64) * WORD_BYTES
        offsets = placement[ranks] * spec.block_size_bytes + within
    elif isinstance(loc, Strided):
        stride = max(WORD_BYTES, loc.stride - loc.stride % WORD_BYTES)
        offsets = (np.arange(n, dtype=np.int64) * stride) % (words * WORD_BYTES)
    elif isinstance(loc, LoopNest):
        sizes = np.array(loc.sizes, dtype=np.int64)
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        i = np.arange(n, dtype=np.int64)
        which = i % len(sizes)
        step = i // len(sizes)
        offsets = starts[which] + (step * WORD_BYTES) % sizes[which]
    elif isinstance(loc, Hotspot):
        kinds, offsets = _hotspot(loc, spec, rng, kinds)
    else:
        raise TraceError(f"unsupported locality {loc!r}")
    addrs = spec.base_address + offsets
    instrs = np.floor(np.arange(n, dtype=np.float64) / spec.mem_ops_per_instruction).astype(np.int64)
    return kinds, addrs.astype(np.int64), instrs


def _hotspot(loc: Hotspot, spec: SyntheticSpec, rng: np.random.Generator,
             cold_kinds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = spec.record_count
    bs = spec.block_size_bytes
    hot_blocks = max(1, loc.hot_bytes // bs)
    nwin = -(-n // loc.window) if n else 0
    win_block = rng.integers(0, hot_blocks, nwin, dtype=np.int64)
    win_stores = rng.random(nwin) < loc.store_windows
    hot = rng.random(n) < loc.fraction
    widx = np.arange(n, dtype=np.int64) // loc.window
    hot_store = win_stores[widx] & (rng.random(n) < 0.5)
    read_block = rng.integers(0, hot_blocks, n, dtype=np.int64)
    within = rng.integers(0, bs // WORD_BYTES, n, dtype=np.int64) * WORD_BYTES
    hot_off = np.where(hot_store, win_block[widx], read_block) * bs + within
    cold_off = rng.integers(0, spec.working_set_bytes // WORD_BYTES, n, dtype=np.int64) * WORD_BYTES
    kinds = np.where(hot, hot_store, cold_kinds.astype(bool)).astype(np.uint8)
    return kinds, np.where(hot, hot_off, cold_off)


def generate(spec: SyntheticSpec) -> Iterator[AccessRecord]:
    kinds, addrs, instrs = generate_arrays(spec)
    for k, a, i in zip(kinds.tolist(), addrs.tolist(), instrs.tolist()):
        yield AccessRecord(Kind(k), a, i)


def generate_tuples(spec: SyntheticSpec) -> list[tuple[int, int, int]]:
    """Plain ``(kind, address, instr)`` tuples; the fast path for long runs."""
    kinds, addrs, instrs = generate_arrays(spec)
    return list(zip(kinds.tolist(), addrs.tolist(), instrs.tolist()))


_SYNTHETIC_KEYS = {
    "records": ("record_count", int),
    "record_count": ("record_count", int),
    "write_fraction": ("write_fraction", float),
    "working_set": ("working_set_bytes", lambda v: int(v, 0)),
    "working_set_bytes": ("working_set_bytes", lambda v: int(v, 0)),
    "locality": ("locality", parse_locality),
    "seed": ("seed", int),
    "base_address": ("base_address", lambda v: int(v, 0)),
    "mem_ops_per_instruction": ("mem_ops_per_instruction", float),
    "block_size": ("block_size_bytes", int),
}

SYNTHETIC_PREFIX = "synthetic:"


def parse_synthetic(text: str) -> SyntheticSpec:
    """``records=100000 write_fraction=0.3 locality=zipf:1.0 seed=7`` (commas also separate)."""
    if text.startswith(SYNTHETIC_PREFIX):
        text = text[len(SYNTHETIC_PREFIX):]
    values: dict = {}
    for token in text.replace(",", " ").split():
        key, sep, raw = token.partition("=")
        if not sep or key not in _SYNTHETIC_KEYS:
            raise TraceError(f"bad synthetic trace field {token!r}")
        name, cast = _SYNTHETIC_KEYS[key]
        try:
            values[name] = cast(raw)
        except ValueError:
            raise TraceError(f"bad value in synthetic trace field {token!r}") from None
    if "record_count" not in values:
        raise TraceError("synthetic trace needs records=<count>")
    return SyntheticSpec(**values)


def load_arrays(ref: PathLike, mem_size: int | None = None,
                mem_ops_per_instruction: float = 0.4) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Whole trace as arrays, from a file or a ``synthetic:...`` description."""
    if isinstance(ref, str) and ref.startswith(SYNTHETIC_PREFIX):
        spec = parse_synthetic(ref)
        spec.validate(mem_size)
        return generate_arrays(spec)
    rows = list(parse_trace(ref, mem_size, mem_ops_per_instruction))
    if not rows:
        return np.zeros(0, np.uint8), np.zeros(0, np.int64), np.zeros(0, np.int64)
    kinds, addrs, instrs = zip(*rows)
    return (np.array(kinds, dtype=np.uint8), np.array(addrs, dtype=np.int64),
            np.array(instrs, dtype=np.int64))
