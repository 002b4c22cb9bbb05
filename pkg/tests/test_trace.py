import io
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvmsim.config import TraceError
from nvmsim.trace import (
    AccessRecord, Hotspot, Kind, LoopNest, Strided, SyntheticSpec, Uniform, Zipf, format_text,
    generate, generate_arrays, load_arrays, pack_binary, parse_binary, parse_locality,
    parse_synthetic, parse_text, parse_trace, trace_extent, write_trace,
)

DATA = Path(__file__).parent / "data"
GOLDEN = [(Kind.READ, 0x1040, 7), (Kind.WRITE, 0x1044, 8), (Kind.WRITE, 0xFFFFFFF0, 1 << 33)]


def test_text_record():
    assert list(parse_text(["W 0x00001040 7"])) == [AccessRecord(Kind.WRITE, 0x1040, 7)]


def test_empty_trace_with_header():
    assert list(parse_text(["# mtr version=1 address_bits=32 records=0"])) == []


@pytest.mark.parametrize("line", ["X 0x10 1", "W", "W 0xzz 1", "R 0x10 1 2"])
def test_malformed_line_names_line_number(line):
    with pytest.raises(TraceError, match="line 1"):
        list(parse_text([line]))


def test_text_errors():
    with pytest.raises(TraceError, match="line 3.*backwards"):
        list(parse_text(["R 0x0 5", "", "R 0x0 4"]))
    with pytest.raises(TraceError, match="out of range"):
        list(parse_text(["R 0x100 1"], mem_size=0x100))
    with pytest.raises(TraceError, match="promises 2"):
        list(parse_text(["# mtr records=2", "R 0x0 1"]))
    with pytest.raises(TraceError, match="version"):
        list(parse_text(["# mtr version=9"]))


def test_missing_instruction_index_uses_ratio():
    recs = list(parse_text(["R 0x0", "R 0x4", "W 0x8 # c"], mem_ops_per_instruction=0.4))
    assert [r[2] for r in recs] == [0, 2, 5]


def test_golden_binary_file():
    raw = (DATA / "golden.mtb").read_bytes()
    assert len(raw) == 16 + 3 * 17
    assert list(parse_trace(DATA / "golden.mtb")) == GOLDEN
    assert pack_binary(GOLDEN) == raw


def test_golden_text_file():
    assert list(parse_trace(DATA / "golden.mtr")) == GOLDEN
    assert format_text(GOLDEN) == (DATA / "golden.mtr").read_text()


def test_binary_errors():
    good = pack_binary(GOLDEN)
    with pytest.raises(TraceError, match="magic"):
        list(parse_binary(io.BytesIO(b"NOPE" + good[4:])))
    with pytest.raises(TraceError, match="truncated header"):
        list(parse_binary(io.BytesIO(good[:10])))
    with pytest.raises(TraceError, match="truncated record"):
        list(parse_binary(io.BytesIO(good[:-3])))
    with pytest.raises(TraceError, match="promises"):
        list(parse_binary(io.BytesIO(good[:16] + good[16:16 + 17])))
    bad_kind = bytearray(good)
    bad_kind[16] = 7
    with pytest.raises(TraceError, match="bad kind"):
        list(parse_binary(io.BytesIO(bytes(bad_kind))))
    with pytest.raises(TraceError, match="cannot read"):
        list(parse_trace("/nonexistent/trace.mtr"))


records_st = st.lists(st.tuples(st.sampled_from([0, 1]), st.integers(0, (1 << 32) - 1), st.integers(0, 1000)),
                      max_size=60).map(lambda rs: [(k, a, i) for (k, a, _), i in
                                                   zip(rs, sorted(r[2] for r in rs))])


@given(records_st)
def test_round_trip_both_formats(records):
    assert [tuple(r) for r in parse_text(io.StringIO(format_text(records)))] == records
    assert [tuple(r) for r in parse_binary(io.BytesIO(pack_binary(records)))] == records


def test_write_trace_picks_format_by_suffix(tmp_path):
    write_trace(tmp_path / "t.mtb", GOLDEN)
    write_trace(tmp_path / "t.mtr", GOLDEN)
    assert (tmp_path / "t.mtb").read_bytes()[:4] == b"MTRB"
    assert (tmp_path / "t.mtr").read_text().startswith("# mtr")
    assert trace_extent(tmp_path / "t.mtb") == (3, (1 << 33) + 1)


def test_generate_all_reads_when_write_fraction_zero():
    assert not any(r.kind for r in generate(SyntheticSpec(2000, write_fraction=0.0)))


@pytest.mark.parametrize("loc", [Uniform(), Zipf(1.2), Strided(256), LoopNest((1024, 2048)), Hotspot()])
def test_generate_is_deterministic(loc):
    spec = SyntheticSpec(5000, 0.3, 1 << 16, loc, seed=11)
    a, b = generate_arrays(spec), generate_arrays(spec)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert pack_binary(generate(spec)) == pack_binary(generate(spec))
    other = generate_arrays(SyntheticSpec(5000, 0.3, 1 << 16, loc, seed=12))
    if not isinstance(loc, (Strided, LoopNest)):
        assert not np.array_equal(a[1], other[1])


@pytest.mark.parametrize("loc", [Uniform(), Zipf(1.0), Strided(64), LoopNest()])
def test_write_fraction_within_two_percent(loc):
    kinds, addrs, instrs = generate_arrays(SyntheticSpec(100_000, 0.3, 1 << 20, loc, seed=3))
    assert abs(kinds.mean() - 0.3) <= 0.02
    assert (addrs % 4 == 0).all() and (np.diff(instrs) >= 0).all()
    assert addrs.min() >= 0 and addrs.max() < (1 << 20) + sum(LoopNest().sizes)


def test_zipf_concentrates_accesses():
    def top_block_share(loc):
        _, addrs, _ = generate_arrays(SyntheticSpec(1_000_000, 0.3, 1 << 20, loc, seed=5))
        return np.bincount(addrs >> 6).max()
    assert top_block_share(Zipf(1.0)) > 10 * top_block_share(Uniform())


def test_hotspot_shape():
    loc = Hotspot(512, 0.2, 64, 0.12)
    kinds, addrs, _ = generate_arrays(SyntheticSpec(200_000, 0.02, 1 << 23, loc, seed=1))
    hot = addrs < 512
    assert abs(hot.mean() - 0.2) < 0.01
    hot_store_share = kinds[hot].mean()
    assert 0.04 < hot_store_share < 0.08  # half of the hot accesses in 12% of windows
    assert abs(kinds[~hot].mean() - 0.02) < 0.005


def test_parse_locality_and_synthetic():
    assert parse_locality("zipf:1.5") == Zipf(1.5)
    assert parse_locality("loopnest:64x128") == LoopNest((64, 128))
    assert parse_locality(str(Hotspot())) == Hotspot()
    with pytest.raises(TraceError):
        parse_locality("gaussian")
    spec = parse_synthetic("synthetic:records=10,write_fraction=0.5 working_set=0x1000 seed=3 locality=strided:8")
    assert spec == SyntheticSpec(10, 0.5, 0x1000, Strided(8), seed=3)
    with pytest.raises(TraceError, match="records"):
        parse_synthetic("synthetic:seed=1")
    with pytest.raises(TraceError):
        parse_synthetic("synthetic:records=1 colour=red")


def test_synthetic_parameter_validation():
    with pytest.raises(TraceError):
        SyntheticSpec(10, write_fraction=1.5).validate()
    with pytest.raises(TraceError, match="fit"):
        SyntheticSpec(10, working_set_bytes=1 << 20, base_address=1 << 20).validate(mem_size=1 << 20)


def test_load_arrays_from_file_and_synthetic(tmp_path):
    write_trace(tmp_path / "g.mtb", GOLDEN[:2])
    kinds, addrs, instrs = load_arrays(tmp_path / "g.mtb")
    assert kinds.tolist() == [0, 1] and addrs.tolist() == [0x1040, 0x1044] and instrs.tolist() == [7, 8]
    kinds, _, _ = load_arrays("synthetic:records=100 seed=1")
    assert len(kinds) == 100
