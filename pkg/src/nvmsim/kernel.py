"""Compiled counts-only simulation of one run.

A flat-array mirror of :class:`nvmsim.engine.Simulator` for runs without
data tracking: same replacement decisions, timing, counters and failure
protocol, about two orders of magnitude faster.  LRU order and DBT order
are kept as monotonically increasing stamps instead of ordered dicts.
The object model stays the reference; tests hold the two to identical
statistics.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .config import HierarchyConfig, LrwEvict, Policy, WritePolicy
from .engine import PowerSchedule, UnsafeBackupError, check_arrays
from .stats import Counts, EnergyLedger, SimStats

# scalar state, st[...]
NOW, PORT, TICK, NDIRTY, HITS, MISSES, STALL, WBQ_FULL = 0, 1, 2, 3, 4, 5, 6, 7
PEAK_DIRTY, PEAK_DBT, PEAK_WBQ, DBT_N, WBQ_HEAD, WBQ_N = 8, 9, 10, 11, 12, 13
LLC_HITS, LLC_MISSES, FAILS, BLOCKS, UNSAFE, BCYC, RCYC = 14, 15, 16, 17, 18, 19, 20
STATUS, ERR_BLOCKS, LAST, NSTATE = 21, 22, 23, 24
# operation counts, cnt[...], in Counts field order
L1R, L1W, LLCR, LLCW, PCMR, PCMW, BRR, BRW, REGW = 0, 1, 2, 3, 4, 5, 6, 7, 8
# parameters, p[...]
(P_SETS, P_ASSOC, P_OFFSET, P_SRAM_R, P_SRAM_W, P_STT_W, P_STT_R, P_WB, P_DBT, P_M, P_N,
 P_LFW, P_WC_MAX, P_WC_HALF, P_LRW_MOST, P_LLC_SETS, P_LLC_ASSOC, P_PCM_R, P_PCM_W,
 P_MODE, P_BR_CAP, P_PAD, P_STRICT, NPARAMS) = range(24)
MODE_BR, MODE_NOBR, MODE_VOLATILE = 0, 1, 2
# l1 rows
BLK, DIRTY, STAMP, SLOT = 0, 1, 2, 3
# wbq rows
Q_BLK, Q_SET, Q_WAY, Q_RES, Q_DONE = 0, 1, 2, 3, 4
# dbt rows
D_LINE, D_WC, D_STAMP = 0, 1, 2


# LLC ------------------------------------------------------------------------

@njit(cache=True)
def _tick(st):
    st[TICK] += 1
    return st[TICK]


@njit(cache=True)
def _llc_find(blk, p, llc):
    assoc = p[P_LLC_ASSOC]
    base = (blk & (p[P_LLC_SETS] - 1)) * assoc
    for i in range(base, base + assoc):
        if llc[BLK, i] == blk:
            return i
    return -1


@njit(cache=True)
def _llc_install(blk, dirty, p, st, cnt, llc, llcn):
    """Allocate a line for ``blk``; returns the PCM writeback cycles paid."""
    assoc = p[P_LLC_ASSOC]
    s = blk & (p[P_LLC_SETS] - 1)
    base = s * assoc
    cycles = 0
    if llcn[s] < assoc:
        slot = base
        while llc[BLK, slot] >= 0:
            slot += 1
        llcn[s] += 1
    else:
        slot = base
        for i in range(base + 1, base + assoc):
            if llc[STAMP, i] < llc[STAMP, slot]:
                slot = i
        if llc[DIRTY, slot]:
            cnt[PCMW] += 1
            cycles = p[P_PCM_W]
    llc[BLK, slot] = blk
    llc[DIRTY, slot] = dirty
    llc[STAMP, slot] = _tick(st)
    return cycles


@njit(cache=True)
def _llc_read(blk, p, st, cnt, llc, llcn):
    cnt[LLCR] += 1
    i = _llc_find(blk, p, llc)
    if i >= 0:
        st[LLC_HITS] += 1
        llc[STAMP, i] = _tick(st)
        return p[P_STT_R]
    st[LLC_MISSES] += 1
    cnt[PCMR] += 1
    return p[P_STT_R] + p[P_PCM_R] + _llc_install(blk, 0, p, st, cnt, llc, llcn)


@njit(cache=True)
def _llc_write(blk, p, st, cnt, llc, llcn):
    cnt[LLCW] += 1
    i = _llc_find(blk, p, llc)
    if i >= 0:
        st[LLC_HITS] += 1
        llc[STAMP, i] = _tick(st)
        llc[DIRTY, i] = 1
        return p[P_STT_W]
    st[LLC_MISSES] += 1
    return p[P_STT_W] + _llc_install(blk, 1, p, st, cnt, llc, llcn)


# WBQ ------------------------------------------------------------------------

@njit(cache=True)
def _wbq_index(k, p, st):
    return (st[WBQ_HEAD] + k) % p[P_N]


@njit(cache=True)
def _wbq_find(blk, p, st, wbq):
    for k in range(st[WBQ_N]):
        i = _wbq_index(k, p, st)
        if wbq[Q_BLK, i] == blk:
            return i
    return -1


@njit(cache=True)
def _push(blk, s, way, resident, start, p, st, wbq):
    port = st[PORT]
    done = (start if start > port else port) + p[P_STT_W]
    st[PORT] = done
    i = _wbq_index(st[WBQ_N], p, st)
    wbq[Q_BLK, i] = blk
    wbq[Q_SET, i] = s
    wbq[Q_WAY, i] = way
    wbq[Q_RES, i] = resident
    wbq[Q_DONE, i] = done
    st[WBQ_N] += 1
    if st[WBQ_N] > st[PEAK_WBQ]:
        st[PEAK_WBQ] = st[WBQ_N]


@njit(cache=True)
def _retire_until(now, p, st, cnt, l1, wbq, llc, llcn):
    while st[WBQ_N] and wbq[Q_DONE, st[WBQ_HEAD]] <= now:
        h = st[WBQ_HEAD]
        st[WBQ_HEAD] = (h + 1) % p[P_N]
        st[WBQ_N] -= 1
        _llc_write(wbq[Q_BLK, h], p, st, cnt, llc, llcn)
        if wbq[Q_RES, h]:
            l1[DIRTY, wbq[Q_SET, h] * p[P_ASSOC] + wbq[Q_WAY, h]] = 0
            st[NDIRTY] -= 1


@njit(cache=True)
def _stall(until, now, st):
    if until > now:
        st[STALL] += until - now
        return until
    return now


@njit(cache=True)
def _wait_for(i, now, p, st, cnt, l1, wbq, llc, llcn):
    now = _stall(wbq[Q_DONE, i], now, st)
    _retire_until(now, p, st, cnt, l1, wbq, llc, llcn)
    return now


@njit(cache=True)
def _blocking_write(blk, now, p, st, cnt, llc, llcn):
    begin = now if now > st[PORT] else st[PORT]
    done = begin + _llc_write(blk, p, st, cnt, llc, llcn)
    st[PORT] = done
    st[STALL] += done - now
    return done


# DBT ------------------------------------------------------------------------

@njit(cache=True)
def _dbt_remove(slot, st, l1, dbt):
    l1[SLOT, dbt[D_LINE, slot]] = -1
    last = st[DBT_N] - 1
    if slot != last:
        dbt[D_LINE, slot] = dbt[D_LINE, last]
        dbt[D_WC, slot] = dbt[D_WC, last]
        dbt[D_STAMP, slot] = dbt[D_STAMP, last]
        l1[SLOT, dbt[D_LINE, slot]] = slot
    st[DBT_N] = last


@njit(cache=True)
def _dbt_insert(line, wc, st, l1, dbt):
    n = st[DBT_N]
    dbt[D_LINE, n] = line
    dbt[D_WC, n] = wc
    dbt[D_STAMP, n] = _tick(st)
    l1[SLOT, line] = n
    st[DBT_N] = n + 1


@njit(cache=True)
def _dbt_victim(p, st, dbt):
    n = st[DBT_N]
    best = 0
    if p[P_LFW]:
        for i in range(1, n):
            if dbt[D_WC, i] < dbt[D_WC, best] or (
                    dbt[D_WC, i] == dbt[D_WC, best] and dbt[D_LINE, i] < dbt[D_LINE, best]):
                best = i
    elif p[P_LRW_MOST]:
        for i in range(1, n):
            if dbt[D_STAMP, i] > dbt[D_STAMP, best]:
                best = i
    else:
        for i in range(1, n):
            if dbt[D_STAMP, i] < dbt[D_STAMP, best]:
                best = i
    return best


@njit(cache=True)
def _dbt_on_write(slot, p, st, dbt):
    if p[P_LFW]:
        if dbt[D_WC, slot] >= p[P_WC_MAX]:
            half = p[P_WC_HALF]
            for i in range(st[DBT_N]):
                wc = dbt[D_WC, i]
                dbt[D_WC, i] = wc - half if wc > half else 0
        else:
            dbt[D_WC, slot] += 1
    else:
        dbt[D_STAMP, slot] = _tick(st)


# L1 -------------------------------------------------------------------------

@njit(cache=True)
def _evict_dirty(blk, s, way, line, now, p, st, cnt, l1, dbt, wbq, llc, llcn):
    if not p[P_DBT]:
        now = _blocking_write(blk, now, p, st, cnt, llc, llcn)
    elif l1[SLOT, line] >= 0:
        _dbt_remove(l1[SLOT, line], st, l1, dbt)
        if p[P_N] == 0:
            now = _blocking_write(blk, now, p, st, cnt, llc, llcn)
        else:
            if st[WBQ_N] >= p[P_N]:
                st[WBQ_FULL] += 1
                now = _wait_for(st[WBQ_HEAD], now, p, st, cnt, l1, wbq, llc, llcn)
            _push(blk, s, way, 0, now, p, st, wbq)
    else:
        wbq[Q_RES, _wbq_find(blk, p, st, wbq)] = 0
    l1[DIRTY, line] = 0
    st[NDIRTY] -= 1
    return now


@njit(cache=True)
def _access(write, addr, now, p, st, cnt, l1, l1n, dbt, wbq, llc, llcn):
    if st[WBQ_N] and wbq[Q_DONE, st[WBQ_HEAD]] <= now:
        _retire_until(now, p, st, cnt, l1, wbq, llc, llcn)
    assoc = p[P_ASSOC]
    blk = addr >> p[P_OFFSET]
    s = blk & (p[P_SETS] - 1)
    base = s * assoc
    line = -1
    for i in range(base, base + assoc):
        if l1[BLK, i] == blk:
            line = i
            break
    if line >= 0:
        st[HITS] += 1
        l1[STAMP, line] = _tick(st)
    else:
        st[MISSES] += 1
        if st[WBQ_N]:
            q = _wbq_find(blk, p, st, wbq)
            if q >= 0:
                now = _wait_for(q, now, p, st, cnt, l1, wbq, llc, llcn)
        if l1n[s] >= assoc:
            line = base
            for i in range(base + 1, base + assoc):
                if l1[STAMP, i] < l1[STAMP, line]:
                    line = i
            if l1[DIRTY, line]:
                now = _evict_dirty(l1[BLK, line], s, line - base, line, now, p, st, cnt, l1, dbt, wbq, llc, llcn)
        else:
            line = base
            while l1[BLK, line] >= 0:
                line += 1
            l1n[s] += 1
        now += _llc_read(blk, p, st, cnt, llc, llcn)
        l1[BLK, line] = blk
        l1[STAMP, line] = _tick(st)
    if not write:
        cnt[L1R] += 1
        return now + p[P_SRAM_R]
    cnt[L1W] += 1
    if not p[P_WB]:
        return _blocking_write(blk, now + p[P_SRAM_W], p, st, cnt, llc, llcn)
    if l1[DIRTY, line]:
        if p[P_DBT] and l1[SLOT, line] >= 0:
            _dbt_on_write(l1[SLOT, line], p, st, dbt)
        return now + p[P_SRAM_W]
    if not p[P_DBT]:
        end = now + p[P_SRAM_W]
    else:
        if st[DBT_N] >= p[P_M]:
            slot = _dbt_victim(p, st, dbt)
            victim = dbt[D_LINE, slot]
            _dbt_remove(slot, st, l1, dbt)
            if p[P_N] == 0:
                now = _blocking_write(l1[BLK, victim], now, p, st, cnt, llc, llcn)
                l1[DIRTY, victim] = 0
                st[NDIRTY] -= 1
                end = now + p[P_SRAM_W]
            else:
                if st[WBQ_N] >= p[P_N]:
                    st[WBQ_FULL] += 1
                    now = _wait_for(st[WBQ_HEAD], now, p, st, cnt, l1, wbq, llc, llcn)
                end = now + p[P_SRAM_W]
                _push(l1[BLK, victim], victim // assoc, victim % assoc, 1, end, p, st, wbq)
        else:
            end = now + p[P_SRAM_W]
            if st[DBT_N] >= st[PEAK_DBT]:
                st[PEAK_DBT] = st[DBT_N] + 1
        _dbt_insert(line, 1, st, l1, dbt)
    l1[DIRTY, line] = 1
    st[NDIRTY] += 1
    if st[NDIRTY] > st[PEAK_DIRTY]:
        st[PEAK_DIRTY] = st[NDIRTY]
    return end


# power failure --------------------------------------------------------------

@njit(cache=True)
def _energy(delta, unit):
    total = 0.0
    for i in range(delta.shape[0]):
        if delta[i]:
            total += delta[i] * unit[i]
    return total


@njit(cache=True)
def _affords(energy, budget):
    if energy <= budget:
        return True
    return abs(energy - budget) <= max(1e-12 * max(abs(energy), abs(budget)), 1e-12)


@njit(cache=True)
def _backup_set(p, st, l1, dbt, wbq, rec):
    """Fill ``rec`` (origin, block, set, way, counter/resident) in checkpoint order."""
    assoc = p[P_ASSOC]
    n = 0
    if not p[P_DBT]:
        for line in range(l1.shape[1]):
            if l1[DIRTY, line]:
                rec[0, n], rec[1, n], rec[2, n], rec[3, n], rec[4, n] = 0, l1[BLK, line], line // assoc, line % assoc, 1
                n += 1
        return n
    order = np.argsort(dbt[D_STAMP, :st[DBT_N]])
    for j in range(order.shape[0]):
        line = dbt[D_LINE, order[j]]
        rec[0, n], rec[1, n], rec[2, n], rec[3, n] = 1, l1[BLK, line], line // assoc, line % assoc
        rec[4, n] = dbt[D_WC, order[j]]
        n += 1
    for k in range(st[WBQ_N]):
        i = _wbq_index(k, p, st)
        rec[0, n], rec[1, n], rec[2, n], rec[3, n], rec[4, n] = 2, wbq[Q_BLK, i], wbq[Q_SET, i], wbq[Q_WAY, i], wbq[Q_RES, i]
        n += 1
    return n


@njit(cache=True)
def _reinstall(rec, n, now, p, st, l1, l1n, dbt, wbq):
    assoc = p[P_ASSOC]
    for j in range(n):
        origin, blk, s, way = rec[0, j], rec[1, j], rec[2, j], rec[3, j]
        if origin == 2 and not rec[4, j]:
            _push(blk, s, way, 0, now, p, st, wbq)
            continue
        line = s * assoc + way
        l1[BLK, line] = blk
        l1[STAMP, line] = _tick(st)
        l1n[s] += 1
        l1[DIRTY, line] = 1
        st[NDIRTY] += 1
        if origin == 1:
            _dbt_insert(line, rec[4, j], st, l1, dbt)
        elif origin == 2:
            _push(blk, s, way, 1, now, p, st, wbq)
    if st[DBT_N] > st[PEAK_DBT]:
        st[PEAK_DBT] = st[DBT_N]
    if st[NDIRTY] > st[PEAK_DIRTY]:
        st[PEAK_DIRTY] = st[NDIRTY]


@njit(cache=True)
def _power_failure(p, st, cnt, bcnt, rcnt, emm, unit, budget, l1, l1n, dbt, wbq, llc, llcn, rec):
    """Backup, power-off, restore.  Sets st[STATUS] and returns False on an abort."""
    before = cnt.copy()
    n = _backup_set(p, st, l1, dbt, wbq, rec)
    mode = p[P_MODE]
    cycles = 0
    if mode == MODE_VOLATILE:
        for i in range(llc.shape[1]):
            if llc[BLK, i] >= 0 and llc[DIRTY, i]:
                cnt[PCMW] += 1
            llc[BLK, i] = -1
            llc[DIRTY, i] = 0
        llcn[:] = 0
        cnt[PCMW] += n
        cnt[REGW] += 1
    elif mode == MODE_BR:
        if n > p[P_BR_CAP]:
            st[STATUS] = 2
            st[ERR_BLOCKS] = n
            return False
        pad = p[P_PAD]
        cnt[BRW] += max(n, min(pad, p[P_BR_CAP]))
        cnt[REGW] += 1
        cycles = max(pad, n) * p[P_STT_W]
    else:
        for j in range(n):
            cycles += _llc_write(rec[1, j], p, st, cnt, llc, llcn)
        cnt[REGW] += 1
    delta = cnt - before
    energy = _energy(delta, unit)
    st[FAILS] += 1
    st[BLOCKS] += n
    st[BCYC] += cycles
    bcnt += delta
    if st[FAILS] == 1 or energy < emm[0]:
        emm[0] = energy
    if st[FAILS] == 1 or energy > emm[1]:
        emm[1] = energy
    if not _affords(energy, budget):
        st[UNSAFE] += 1
        if p[P_STRICT]:
            st[STATUS] = 1
            st[ERR_BLOCKS] = n
            emm[2] = energy
            return False
    # power off
    l1[BLK, :] = -1
    l1[DIRTY, :] = 0
    l1[STAMP, :] = 0
    l1[SLOT, :] = -1
    l1n[:] = 0
    st[NDIRTY] = 0
    st[DBT_N] = 0
    st[WBQ_N] = 0
    st[WBQ_HEAD] = 0
    st[PORT] = st[NOW]
    # restore
    before = cnt.copy()
    if mode == MODE_BR:
        cnt[BRR] += n
        c = n * p[P_STT_R]
        st[NOW] += c
        st[RCYC] += c
        _reinstall(rec, n, st[NOW], p, st, l1, l1n, dbt, wbq)
    rcnt += cnt - before
    return True


@njit(cache=True)
def _run(kinds, addrs, instrs, points, p, st, cnt, bcnt, rcnt, emm, unit, budget,
         l1, l1n, dbt, wbq, llc, llcn, rec):
    fi = 0
    nf = points.shape[0]
    last = st[LAST]
    for i in range(kinds.shape[0]):
        ins = instrs[i]
        while fi < nf and ins >= points[fi]:
            if not _power_failure(p, st, cnt, bcnt, rcnt, emm, unit, budget, l1, l1n, dbt, wbq, llc, llcn, rec):
                return
            fi += 1
        now = st[NOW]
        if ins > last + 1:
            now += ins - last - 1
        last = ins
        st[LAST] = last
        st[NOW] = _access(kinds[i], addrs[i], now, p, st, cnt, l1, l1n, dbt, wbq, llc, llcn)


# driver ---------------------------------------------------------------------

def _params(c: HierarchyConfig) -> np.ndarray:
    p = np.zeros(NPARAMS, dtype=np.int64)
    p[P_SETS], p[P_ASSOC] = c.l1_sets, c.l1_assoc
    p[P_OFFSET] = c.block_size_bytes.bit_length() - 1
    p[P_SRAM_R], p[P_SRAM_W] = c.sram_read_cycles, c.sram_write_cycles
    p[P_STT_R], p[P_STT_W] = c.sttram_read_cycles, c.sttram_write_cycles
    wb = c.write_policy is WritePolicy.WRITE_BACK
    p[P_WB] = wb
    p[P_DBT] = wb and c.dbt_enabled
    p[P_M], p[P_N] = c.dbt_entries, c.wbq_entries
    p[P_LFW] = Policy(c.policy) is Policy.LFW
    p[P_WC_MAX] = (1 << c.wc_bits) - 1
    p[P_WC_HALF] = 1 << (c.wc_bits - 1) if c.wc_bits > 0 else 0
    p[P_LRW_MOST] = LrwEvict(c.lrw_evict) is LrwEvict.MOST_RECENT
    p[P_LLC_SETS], p[P_LLC_ASSOC] = c.llc_sets, c.llc_assoc
    p[P_PCM_R], p[P_PCM_W] = c.pcm_read_cycles, c.pcm_write_cycles
    if c.llc_volatile:
        p[P_MODE] = MODE_VOLATILE
    else:
        p[P_MODE] = MODE_BR if c.br_enabled else MODE_NOBR
    p[P_BR_CAP] = c.br_capacity
    p[P_PAD] = c.br_capacity if c.br_fixed_image else 0
    p[P_STRICT] = c.strict_capacitor
    return p


class KernelRun:
    """State of one compiled run; records arrive through :meth:`feed`, possibly in chunks."""

    def __init__(self, config: HierarchyConfig, schedule: PowerSchedule | None = None):
        c = config.validate()
        self.config = c
        self.p = _params(c)
        nlines = c.l1_sets * c.l1_assoc
        self.st = np.zeros(NSTATE, dtype=np.int64)
        self.st[LAST] = -1
        self.cnt = np.zeros(9, dtype=np.int64)
        self.bcnt = np.zeros(9, dtype=np.int64)
        self.rcnt = np.zeros(9, dtype=np.int64)
        self.emm = np.zeros(3, dtype=np.float64)
        self.ledger = EnergyLedger(c)
        self.unit = np.array(self.ledger.unit, dtype=np.float64)
        self.l1 = np.zeros((4, nlines), dtype=np.int64)
        self.l1[BLK] = -1
        self.l1[SLOT] = -1
        self.l1n = np.zeros(c.l1_sets, dtype=np.int64)
        self.dbt = np.zeros((3, max(c.dbt_entries, 1)), dtype=np.int64)
        self.wbq = np.zeros((5, max(c.wbq_entries, 1)), dtype=np.int64)
        nllc = c.llc_sets * c.llc_assoc
        self.llc = np.zeros((3, nllc), dtype=np.int64)
        self.llc[BLK] = -1
        self.llcn = np.zeros(c.llc_sets, dtype=np.int64)
        self.rec = np.zeros((5, nlines + max(c.wbq_entries, 1)), dtype=np.int64)
        self.accesses = 0
        self._points = schedule.failure_points() if schedule is not None else iter(())
        self._next_point = next(self._points, None)

    def _points_through(self, last_instr: int) -> np.ndarray:
        # every point at or before the chunk's last instruction fires inside the chunk
        out = []
        while self._next_point is not None and self._next_point <= last_instr:
            out.append(self._next_point)
            self._next_point = next(self._points, None)
        return np.array(out, dtype=np.int64)

    def feed(self, kinds: np.ndarray, addrs: np.ndarray, instrs: np.ndarray) -> "KernelRun":
        if len(kinds) == 0 and len(addrs) == 0 and len(instrs) == 0:
            return self
        addrs, instrs, _ = check_arrays(self.config, kinds, addrs, instrs, int(self.st[LAST]), self.accesses)
        _run(np.ascontiguousarray(kinds, dtype=np.int64), addrs, instrs, self._points_through(int(instrs[-1])),
             self.p, self.st, self.cnt, self.bcnt, self.rcnt, self.emm, self.unit,
             float(self.config.e_capacitor_nj), self.l1, self.l1n, self.dbt, self.wbq,
             self.llc, self.llcn, self.rec)
        self.accesses += len(kinds)
        self._raise_if_aborted()
        return self

    def _raise_if_aborted(self) -> None:
        st, budget = self.st, self.config.e_capacitor_nj
        if st[STATUS] == 2:
            blocks = int(st[ERR_BLOCKS])
            energy = self.ledger.energy(Counts(br_writes=blocks, regfile_writes=1))
            raise UnsafeBackupError(int(st[FAILS]), energy, budget, blocks)
        if st[STATUS] == 1:
            raise UnsafeBackupError(int(st[FAILS]) - 1, float(self.emm[2]), budget, int(st[ERR_BLOCKS]))

    def stats(self) -> SimStats:
        st, ledger = self.st, self.ledger
        total = Counts(*(int(v) for v in self.cnt))
        backup = Counts(*(int(v) for v in self.bcnt))
        restore = Counts(*(int(v) for v in self.rcnt))
        e_stable = ledger.energy(total - backup - restore)
        e_backup = ledger.energy(backup)
        e_restore = ledger.energy(restore)
        fails = int(st[FAILS])
        return SimStats(
            instructions=int(st[LAST]) + 1,
            accesses=self.accesses,
            l1_reads=total.l1_reads, l1_writes=total.l1_writes,
            l1_hits=int(st[HITS]), l1_misses=int(st[MISSES]),
            llc_reads=total.llc_reads, llc_writes=total.llc_writes,
            llc_hits=int(st[LLC_HITS]), llc_misses=int(st[LLC_MISSES]),
            pcm_reads=total.pcm_reads, pcm_writes=total.pcm_writes,
            br_reads=total.br_reads, br_writes=total.br_writes,
            stall_cycles=int(st[STALL]), wbq_full_stalls=int(st[WBQ_FULL]),
            total_cycles=int(st[NOW]),
            backup_cycles=int(st[BCYC]), restore_cycles=int(st[RCYC]),
            stable_energy_nj=e_stable, backup_energy_nj=e_backup, restore_energy_nj=e_restore,
            total_energy_nj=e_stable + e_backup + e_restore,
            backups_performed=fails,
            blocks_backed_up=int(st[BLOCKS]),
            unsafe_backups=int(st[UNSAFE]),
            backup_energy_min_nj=float(self.emm[0]) if fails else 0.0,
            backup_energy_max_nj=float(self.emm[1]) if fails else 0.0,
            peak_dirty=int(st[PEAK_DIRTY]), peak_dbt=int(st[PEAK_DBT]), peak_wbq=int(st[PEAK_WBQ]),
        )
