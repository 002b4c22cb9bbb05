import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nvmsim.config import PAPER_DEFAULT, capacitor_for

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")


def tiny_config(**changes):
    """A 1KB 2-way L1 (8 sets) over a 4KB LLC: small enough to hand-trace."""
    base = PAPER_DEFAULT.replace(
        l1_size_bytes=1024, l1_assoc=2, llc_size_bytes=4096, llc_assoc=4,
        mem_size_bytes=1 << 20, k_max_dirty=3, dbt_entries=2, wbq_entries=1,
    )
    cfg = base.replace(**changes)
    if "e_capacitor_nj" not in changes:
        cfg = cfg.replace(e_capacitor_nj=capacitor_for(cfg.k_max_dirty, cfg.e_reg_file_nj,
                                                       cfg.llc_write_energy_nj))
    return cfg.validate()


def block_addr(config, set_index, tag):
    """Byte address of the block with this tag in this L1 set."""
    return (tag * config.l1_sets + set_index) * config.block_size_bytes


@pytest.fixture
def tiny():
    return tiny_config()


def random_trace(rng: np.random.Generator, n: int, span: int, write_fraction: float = 0.4,
                 ratio_gap: int = 2):
    kinds = (rng.random(n) < write_fraction).astype(np.uint8)
    addrs = rng.integers(0, span, n, dtype=np.int64) & ~3
    instrs = np.cumsum(rng.integers(1, ratio_gap + 1, n)) - 1
    return list(zip(kinds.tolist(), addrs.tolist(), instrs.tolist()))


# acceptance reporting: one PASS/FAIL line per criterion --------------------------

_criteria: dict[int, tuple[str, list[bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.skipped or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    _criteria.setdefault(number, (title, []))[1].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcomes = _criteria[number]
        verdict = "PASS" if outcomes and all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
