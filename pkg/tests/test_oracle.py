import numpy as np
import pytest

from nvmsim.baselines import preset
from nvmsim.engine import PowerSchedule, Simulator
from nvmsim.oracle import OracleMemory, check_consistency, normalize_image, oracle_run, store_value

from conftest import random_trace, tiny_config
from mutants import DROPPED, MUTANTS, workload


def test_empty_trace_gives_zero_image():
    assert oracle_run([]) == {}


def test_single_write_lands_at_its_word():
    image = oracle_run([(1, 0x40, 3)])
    v = store_value(0x40, 3)
    assert image == {1: v.to_bytes(4, "little") + bytes(60)}
    assert OracleMemory().read_word(0x42) == 0


def test_store_values_are_nonzero_and_vary():
    values = {store_value(a, i) for a in range(0, 4096, 4) for i in range(3)}
    assert 0 not in values and len(values) > 3000


def test_later_write_wins():
    mem = OracleMemory(write_log=[])
    mem.write(0x80, 1)
    mem.write(0x81, 2)
    assert mem.read_word(0x80) == store_value(0x81, 2)
    assert len(mem.write_log) == 2


def test_check_reports_first_divergent_byte():
    ref = {2: bytes(range(64))}
    bad = {2: bytes(range(10)) + b"\xff" + bytes(range(11, 64))}
    report = check_consistency(bad, ref)
    assert not report and report.first_divergent_address == 2 * 64 + 10 and report.divergent_blocks == 1
    assert check_consistency({5: bytes(64)}, {}).passed
    assert normalize_image({1: bytearray(64), 2: b"\x01" + bytes(63)}) == {2: b"\x01" + bytes(63)}


@pytest.mark.parametrize("name", ["proposed", "proposed-nobr", "baseline-1", "baseline-2", "baseline-3",
                                  "architecture-1"])
@pytest.mark.parametrize("failures", [0, 40])
def test_every_variant_is_crash_consistent(name, failures):
    cfg = preset(name, tiny_config())
    trace = random_trace(np.random.default_rng(7), 6000, 1 << 14)
    sim = Simulator(cfg, track_data=True)
    sim.run(trace, PowerSchedule.evenly(trace[-1][2] + 1, failures))
    sim.power_failure()
    assert check_consistency(sim.memory_image(), oracle_run(trace)).passed


def mutant_detected(preset_name, kind):
    cfg = preset(preset_name, tiny_config())
    trace = workload(kind)
    sim = Simulator(cfg, track_data=True)
    sim.run(trace, PowerSchedule.evenly(trace[-1][2] + 1, 40))
    sim.power_failure()
    return check_consistency(sim.memory_image(), oracle_run(trace))


@pytest.mark.parametrize("name, preset_name, kind, apply", MUTANTS, ids=[m[0] for m in MUTANTS])
def test_mutant_is_detected(monkeypatch, name, preset_name, kind, apply):
    apply(monkeypatch)
    report = mutant_detected(preset_name, kind)
    assert not report.passed


def test_dropped_wbq_entry_is_named():
    # each block written exactly once, so the dropped writeback is never repaired
    cfg = tiny_config()
    trace = workload("write-once", n=128)
    mp = pytest.MonkeyPatch()
    try:
        MUTANTS[0][3](mp)
        sim = Simulator(cfg, track_data=True)
        sim.run(trace)
        sim.power_failure()
        report = check_consistency(sim.memory_image(), oracle_run(trace))
    finally:
        mp.undo()
    assert not report.passed and report.divergent_blocks == 1
    assert report.first_divergent_address // 64 == DROPPED[0]
