import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvmsim.config import LrwEvict, Policy
from nvmsim.policies import DirtyBlockTable


def lfw(counters, bits=5):
    dbt = DirtyBlockTable(len(counters), Policy.LFW, bits)
    for line, wc in enumerate(counters):
        dbt.insert(line, wc)
    return dbt


def lrw(m, evict=LrwEvict.MOST_RECENT):
    dbt = DirtyBlockTable(m, Policy.LRW, 0, evict)
    for line in range(m):
        dbt.insert(line)
    return dbt


def test_plain_increment():
    dbt = lfw([3, 7])
    dbt.on_write(0)
    assert dbt.counters() == {0: 4, 1: 7}


def test_saturated_write_rescales():
    dbt = lfw([19, 17, 31, 3])
    dbt.on_write(2)
    assert list(dbt.counters().values()) == [3, 1, 15, 0]


@pytest.mark.parametrize("before, after", [([31], [15]), ([31, 5], [15, 0])])
def test_rescale_floors_at_zero(before, after):
    dbt = lfw(before)
    dbt.rescale()
    assert list(dbt.counters().values()) == after


def test_new_entry_counts_one_write():
    dbt = DirtyBlockTable(4, Policy.LFW, 6)
    dbt.insert(9)
    assert dbt.counter(9) == 1


def test_lfw_victim_is_min_counter():
    assert lfw([3, 1, 15, 0]).select_victim() == 3


def test_lfw_ties_go_to_lowest_line():
    dbt = DirtyBlockTable(3, Policy.LFW, 6)
    for line in (40, 7, 22):
        dbt.insert(line)
    assert dbt.select_victim() == 7


def test_lrw_write_moves_entry_to_most_recent():
    dbt = lrw(4)
    dbt.on_write(0)
    assert dbt.counters() == {1: 0, 2: 1, 3: 2, 0: 3}


def test_lrw_victim_default_and_flag():
    assert lrw(4).select_victim() == 3
    assert lrw(4, LrwEvict.LEAST_RECENT).select_victim() == 0


def test_victim_on_non_full_table_asserts():
    dbt = DirtyBlockTable(4, Policy.LFW, 6)
    dbt.insert(1)
    with pytest.raises(AssertionError):
        dbt.select_victim()


def test_restore_round_trip():
    for dbt in (lfw([5, 2, 9]), lrw(3)):
        dbt.on_write(1)
        items = list(dbt.counters().items())
        other = DirtyBlockTable(dbt.capacity, dbt.policy, dbt.wc_bits)
        other.restore(items)
        assert other.counters() == dbt.counters()
        assert other.select_victim() == dbt.select_victim()


ops = st.lists(st.tuples(st.sampled_from(["insert", "write", "evict"]), st.integers(0, 63)), max_size=300)


def _drive(dbt, program):
    victims = []
    for op, line in program:
        if op == "insert" and line not in dbt:
            if dbt.full:
                victims.append(dbt.select_victim())
                dbt.remove(victims[-1])
            dbt.insert(line)
        elif op == "write" and len(dbt):
            dbt.on_write(list(dbt)[line % len(dbt)])
        elif op == "evict" and len(dbt):
            dbt.remove(list(dbt)[line % len(dbt)])
    return victims


@given(ops, st.integers(1, 8), st.integers(1, 6))
def test_lfw_counters_stay_in_range(program, m, bits):
    dbt = DirtyBlockTable(m, Policy.LFW, bits)
    _drive(dbt, program)
    assert len(dbt) <= m
    assert all(0 <= wc < (1 << bits) for wc in dbt.counters().values())


@given(ops, st.integers(1, 8))
def test_lrw_ranks_form_a_prefix_permutation(program, m):
    dbt = DirtyBlockTable(m, Policy.LRW, 0)
    _drive(dbt, program)
    assert sorted(dbt.counters().values()) == list(range(len(dbt)))


@given(st.lists(st.integers(0, 30), min_size=2, max_size=8, unique=True), st.integers(1, 20))
def test_lfw_argmin_invariant_to_uniform_shift(counters, shift):
    a = lfw(counters, bits=6)
    b = lfw([c + shift for c in counters], bits=6)
    assert a.select_victim() == b.select_victim()


@given(ops, st.sampled_from(list(Policy)))
def test_victim_sequence_is_deterministic(program, policy):
    runs = [_drive(DirtyBlockTable(4, policy, 3), program) for _ in range(2)]
    assert runs[0] == runs[1]
