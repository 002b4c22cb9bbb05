import math

import numpy as np
import pytest

from nvmsim.baselines import preset
from nvmsim.config import PAPER_DEFAULT, ConfigError, TraceError
from nvmsim.engine import PowerSchedule, Simulator, UnsafeBackupError, run
from nvmsim.oracle import check_consistency, oracle_run
from nvmsim.stats import SimStats
from nvmsim.trace import SyntheticSpec, Zipf, generate_arrays, generate_tuples

from conftest import block_addr, random_trace, tiny_config


def per_instruction_trace(n=10_000, seed=1):
    rng = np.random.default_rng(seed)
    kinds = (rng.random(n) < 0.3).astype(int).tolist()
    addrs = (rng.integers(0, 1 << 16, n) & ~3).tolist()
    return list(zip(kinds, addrs, range(n)))


def test_empty_trace_gives_zero_stats():
    assert run([], PAPER_DEFAULT) == SimStats()


def test_periodic_failures_counted_by_instruction():
    stats = run(per_instruction_trace(), PAPER_DEFAULT, PowerSchedule.periodic(2000))
    assert stats.backups_performed == 4  # at 2000..8000; 10000 lies past the last record
    stats = run(per_instruction_trace(10_001), PAPER_DEFAULT, PowerSchedule.periodic(2000))
    assert stats.backups_performed == 5


@pytest.mark.parametrize("schedule", [None, PowerSchedule.periodic(2000), PowerSchedule.periodic(137)])
def test_final_image_matches_oracle(schedule):
    trace = per_instruction_trace(6000, seed=2)
    sim = Simulator(PAPER_DEFAULT, track_data=True)
    sim.run(trace, schedule)
    assert check_consistency(sim.memory_image(), oracle_run(trace)).passed


def test_run_arrays_matches_run():
    arrays = generate_arrays(SyntheticSpec(20_000, 0.3, 1 << 18, Zipf(0.9), seed=4))
    tuples = list(zip(*(a.tolist() for a in arrays)))
    for name in ("proposed", "proposed-nobr", "baseline-1", "baseline-2", "architecture-1"):
        cfg = preset(name)
        sched = PowerSchedule.evenly(int(arrays[2][-1]) + 1, 17)
        assert Simulator(cfg).run_arrays(*arrays, sched) == Simulator(cfg).run(tuples, sched), name


def test_energy_ledger_is_additive():
    stats = run(generate_tuples(SyntheticSpec(15_000, seed=9)), PAPER_DEFAULT, PowerSchedule.periodic(3000))
    parts = stats.stable_energy_nj + stats.backup_energy_nj + stats.restore_energy_nj
    assert math.isclose(stats.total_energy_nj, parts, rel_tol=1e-12)


def test_backup_energy_grows_with_failure_count():
    arrays = generate_arrays(SyntheticSpec(20_000, seed=5))
    total = int(arrays[2][-1]) + 1
    energies = [Simulator(preset("baseline-2")).run_arrays(*arrays, PowerSchedule.evenly(total, f)).backup_energy_nj
                for f in (0, 5, 20, 80)]
    assert energies == sorted(energies)


def test_fixed_image_backup_costs_the_full_budget():
    stats = run(generate_tuples(SyntheticSpec(8_000, seed=3)), PAPER_DEFAULT, PowerSchedule.periodic(1000))
    assert stats.backup_energy_constant
    assert math.isclose(stats.backup_energy_max_nj, 16 * 0.542 + 0.542)
    assert math.isclose(stats.backup_energy_max_nj, PAPER_DEFAULT.e_capacitor_nj)


def test_zero_dirty_backup_costs_register_file_only():
    cfg = PAPER_DEFAULT.replace(br_fixed_image=False)
    sim = Simulator(cfg)
    assert sim.do_backup() == cfg.e_reg_file_nj
    sim = Simulator(preset("baseline-1"))
    assert sim.do_backup() == cfg.e_reg_file_nj


def test_k_dirty_backup_equals_budget_without_padding():
    cfg = tiny_config(br_fixed_image=False)
    sim = Simulator(cfg)
    now = 0
    for s in range(3):
        now = sim.l1.access(False, block_addr(cfg, s, 0), None, now)
    for s in range(3):
        now = sim.l1.access(True, block_addr(cfg, s, 0), None, now)
    sim.now = now
    assert sim.l1.ndirty == cfg.k_max_dirty
    assert math.isclose(sim.do_backup(), cfg.e_capacitor_nj)


def test_unbounded_baseline_aborts_in_strict_mode():
    cfg = preset("baseline-2").replace(strict_capacitor=True)
    trace = [(1, i * 64, i) for i in range(256)]
    with pytest.raises(UnsafeBackupError, match="failure #0") as info:
        run(trace, cfg, PowerSchedule.explicit([255]))
    assert info.value.failure_index == 0
    assert info.value.blocks == 255
    lax = run(trace, preset("baseline-2"), PowerSchedule.explicit([255]))
    assert lax.unsafe_backups == 1


def test_no_br_power_on_is_cold():
    cfg = PAPER_DEFAULT.replace(br_enabled=False, strict_capacitor=False)
    sim = Simulator(cfg)
    sim.run([(1, 0, 0), (0, 64, 1)], PowerSchedule.explicit([2]))
    sim.power_failure()
    assert sim.l1.ndirty == 0 and not any(sim.l1.sets)
    misses = sim.l1.misses
    sim.run([(0, 0, 3)])
    assert sim.l1.misses == misses + 1 and sim.llc.hits >= 1


def test_volatile_llc_flushes_to_pcm():
    cfg = preset("architecture-1")
    sim = Simulator(cfg, track_data=True)
    trace = [(1, i * 64, i) for i in range(40)]
    sim.run(trace)
    sim.power_failure()
    assert not any(sim.llc.sets) and sim.pcm.writes == 40
    assert check_consistency(sim.memory_image(), oracle_run(trace)).passed


def test_no_br_checkpoint_displaces_dirty_llc_victims():
    # LLC set 0 full of dirty blocks; two dirty L1 blocks (one L1 set's ways) also map to it
    results = {}
    for br in (True, False):
        cfg = tiny_config(br_enabled=br, strict_capacitor=br)
        sim = Simulator(cfg)
        stride = cfg.llc_sets
        now = 0
        for i in range(2):
            now = sim.l1.access(False, i * stride * 64, None, now)
        for i in range(cfg.llc_assoc):  # pushes the clean fills back out
            sim.llc.write((10 + i) * stride, None)
        for i in range(2):
            now = sim.l1.access(True, i * stride * 64, None, now)
        sim.now = now
        pcm = sim.pcm.writes
        sim.power_failure()
        results[br] = sim.pcm.writes - pcm
    assert results == {True: 0, False: 2}


def test_br_checkpoints_never_touch_llc_or_pcm():
    for seed in (1, 2, 3):
        arrays = generate_arrays(SyntheticSpec(30_000, 0.3, 1 << 20, Zipf(0.8), seed=seed))
        sched = PowerSchedule.evenly(int(arrays[2][-1]) + 1, 60)
        br, nobr = Simulator(preset("proposed")), Simulator(preset("proposed-nobr"))
        br.run_arrays(*arrays, sched)
        nobr.run_arrays(*arrays, sched)
        assert br.backup_counts.llc_writes == br.backup_counts.pcm_writes == 0
        assert nobr.backup_counts.llc_writes == nobr.blocks_backed_up > 0
        assert nobr.backup_counts.br_writes == 0


def test_trace_errors():
    with pytest.raises(TraceError, match="backwards"):
        run([(0, 0, 5), (0, 0, 4)], PAPER_DEFAULT)
    with pytest.raises(TraceError, match="outside"):
        run([(0, PAPER_DEFAULT.mem_size_bytes, 0)], PAPER_DEFAULT)
    wrapped = run([(0, PAPER_DEFAULT.mem_size_bytes + 64, 0)], PAPER_DEFAULT.replace(allow_address_wrap=True))
    assert wrapped.accesses == 1
    with pytest.raises(TraceError, match="backwards"):
        Simulator(PAPER_DEFAULT).run_arrays(np.array([0, 0]), np.array([0, 0]), np.array([3, 1]))


def test_schedule_validation():
    with pytest.raises(ConfigError):
        PowerSchedule.periodic(0)
    with pytest.raises(ConfigError):
        PowerSchedule.explicit([5, 5])
    with pytest.raises(ConfigError):
        PowerSchedule.evenly(10, 10)
    assert PowerSchedule.evenly(1000, 3).points == (250, 500, 750)
    assert PowerSchedule.none().describe() == "stable power"


def test_audit_mode_checks_invariants_during_run():
    trace = random_trace(np.random.default_rng(0), 3000, 1 << 14)
    stats = Simulator(tiny_config()).run(trace, PowerSchedule.periodic(300), audit_every=1)
    assert stats.peak_dirty <= 3
