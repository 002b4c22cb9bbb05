import pytest

from nvmsim.config import ConfigError
from nvmsim.engine import PowerSchedule, Simulator
from nvmsim.baselines import preset
from nvmsim.plotting import FAMILIES, render_report, select_rows
from nvmsim.results import result_row
from nvmsim.trace import SyntheticSpec, generate_arrays


@pytest.fixture(scope="module")
def rows():
    arrays = generate_arrays(SyntheticSpec(5000, 0.3, 1 << 16, seed=8))
    sched = PowerSchedule.evenly(int(arrays[2][-1]) + 1, 10)
    out = []
    for i, name in enumerate(("baseline-1", "baseline-2", "baseline-3", "proposed")):
        cfg = preset(name)
        out.append(result_row(i, name, "run", cfg, 10, Simulator(cfg).run_arrays(*arrays, sched)))
    return out


def test_one_svg_per_family_and_deterministic(rows, tmp_path):
    first = render_report(rows, tmp_path / "a")
    second = render_report(rows, tmp_path / "b")
    assert [p.name for p in first] == [f"{f}.svg" for f in FAMILIES]
    for a, b in zip(first, second):
        text = a.read_text()
        assert text.startswith("<?xml") and "<svg" in text
        assert a.read_bytes() == b.read_bytes()
    assert "baseline-1" in first[0].read_text() or "normalized" in first[0].read_text()


def test_reference_must_exist(rows, tmp_path):
    with pytest.raises(ConfigError, match="reference"):
        render_report(rows, tmp_path, baseline="baseline-7")
    with pytest.raises(ConfigError, match="no rows"):
        render_report([], tmp_path)


def test_large_result_sets_keep_best_variants(rows):
    many = [dict(r, run_id=str(i), role="variant", total_energy_nj=str(100 - i)) for i, r in
            enumerate(rows * 5)]
    chosen = select_rows(many, top=3)
    assert [r["run_id"] for r in chosen] == ["17", "18", "19"]
