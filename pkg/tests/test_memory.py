import math

import pytest

from nvmsim.config import PAPER_DEFAULT
from nvmsim.engine import Simulator
from nvmsim.memory import BackupRecord, BackupRegion, LastLevelCache, MainMemory
from nvmsim.stats import Counts, EnergyLedger

from conftest import block_addr, tiny_config


def llc_pair(cfg=PAPER_DEFAULT, track=False):
    pcm = MainMemory(cfg, track)
    return LastLevelCache(cfg, pcm, track), pcm


def energy(**counts):
    return EnergyLedger(PAPER_DEFAULT).energy(Counts(**counts))


def test_llc_read_hit_and_write_hit_costs():
    llc, _ = llc_pair()
    llc.read(5)
    cycles, _ = llc.read(5)
    assert cycles == 2 and math.isclose(energy(llc_reads=1), 0.123)
    assert llc.write(5, None) == 10 and math.isclose(energy(llc_writes=1), 0.542)


def test_llc_read_miss_clean_victim():
    llc, pcm = llc_pair()
    cycles, _ = llc.read(9)
    assert cycles == 2 + 35 and pcm.reads == 1 and pcm.writes == 0
    assert math.isclose(energy(llc_reads=1, pcm_reads=1), 0.123 + 1.553)


def test_llc_dirty_victim_goes_to_pcm():
    cfg = tiny_config()
    llc, pcm = llc_pair(cfg)
    sets = cfg.llc_sets
    llc.write(0, None)
    for i in range(1, cfg.llc_assoc):
        llc.read(i * sets)
    cycles, _ = llc.read(cfg.llc_assoc * sets)
    assert pcm.writes == 1 and cycles == 2 + 35 + 100
    assert 0 not in llc


def test_llc_lru_never_evicts_most_recent():
    cfg = tiny_config()
    llc, _ = llc_pair(cfg)
    sets = cfg.llc_sets
    for i in range(cfg.llc_assoc):
        llc.read(i * sets)
    llc.read(0)
    llc.read(cfg.llc_assoc * sets)
    assert 0 in llc and sets not in llc
    assert llc.lru_order(0)[-1] == cfg.llc_assoc * sets


def test_pcm_write_energy_is_set_reset_mean():
    assert math.isclose(energy(pcm_writes=1), (6.927 + 6.946) / 2)


def record(i, data=None):
    return BackupRecord("dbt", i, i, 0, 1, True, data)


def test_br_store_costs():
    br = BackupRegion.for_config(PAPER_DEFAULT)
    assert br.store([], {"pc": 1}) == PAPER_DEFAULT.e_reg_file_nj
    assert math.isclose(br.store([record(i) for i in range(16)], {}), 16 * 0.542 + 0.542)
    assert math.isclose(br.store([], {}, pad_to=16), 9.214)


def test_br_store_over_capacity_asserts():
    br = BackupRegion.for_config(PAPER_DEFAULT)
    with pytest.raises(AssertionError):
        br.store([record(i) for i in range(17)], {})


def test_br_restore_round_trip_and_cold_start():
    br = BackupRegion.for_config(PAPER_DEFAULT)
    assert br.restore() == ([], None, 0.0, 0)
    recs = [record(i, bytes([i]) * 64) for i in range(5)]
    br.store(recs, {"instr_index": 41})
    got, regs, e, cycles = br.restore()
    assert got == recs and regs == {"instr_index": 41}
    assert math.isclose(e, 5 * 0.123) and cycles == 5 * 2
    assert not br.valid


def _fill_dirty(sim, cfg, n):
    now = 0
    blocks = [block_addr(cfg, s, 0) for s in range(n)]
    for a in blocks:
        now = sim.l1.access(False, a, None, now)
    for i, a in enumerate(blocks):
        now = sim.l1.access(True, a, i + 1 if sim.track_data else None, now)
    return now


def test_br_restore_reinstalls_dirty_with_tracking():
    cfg = tiny_config(k_max_dirty=5, dbt_entries=3, wbq_entries=2)
    sim = Simulator(cfg, track_data=True)
    sim.now = _fill_dirty(sim, cfg, 5)
    before_dirty = {sim.l1.line_block[l] for l in sim.l1.dirty_lines()}
    before_dbt = sim.l1.dbt.counters()
    before_image = sim.memory_image()
    sim.power_failure()
    assert {sim.l1.line_block[l] for l in sim.l1.dirty_lines()} == before_dirty
    assert sim.l1.ndirty == 5 == cfg.k_max_dirty
    assert sim.l1.dbt.counters() == before_dbt and len(sim.l1.wbq) == 2
    assert sim.memory_image() == before_image
    sim.l1.check_invariants()


def test_no_br_backup_goes_through_llc():
    cfg = tiny_config(br_enabled=False, strict_capacitor=False)
    sim = Simulator(cfg)
    sim.now = _fill_dirty(sim, cfg, 3)
    writes = sim.llc.writes
    sim.power_failure()
    assert sim.llc.writes == writes + 3
    assert sim.l1.ndirty == 0 and not any(sim.l1.sets)
