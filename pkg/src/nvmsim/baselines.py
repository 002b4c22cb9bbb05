"""Named architecture presets and the sweep's variant builder.

All presets share the default capacitor (sized for K = 16).  Baselines run
without the DBT, WBQ and backup region; their capacitor check is advisory
(``strict_capacitor = false``) so they still produce comparable numbers, and
flipping it back on makes an oversized checkpoint abort.
"""

from __future__ import annotations

import enum

from .config import ConfigError, HierarchyConfig, PAPER_DEFAULT, Policy, WritePolicy, capacitor_for


class BaselineId(str, enum.Enum):
    BASELINE1 = "baseline-1"
    BASELINE2 = "baseline-2"
    BASELINE3 = "baseline-3"
    PROPOSED = "proposed"


def _unbounded(base: HierarchyConfig, **changes) -> HierarchyConfig:
    return base.replace(dbt_enabled=False, br_enabled=False, strict_capacitor=False, **changes)


def preset(name: str, base: HierarchyConfig = PAPER_DEFAULT) -> HierarchyConfig:
    """Config for a named architecture, derived from ``base``."""
    key = name.strip().lower().replace("_", "-")
    if key in ("proposed", "paper-default", "proposed-br"):
        return base
    if key == "proposed-nobr":
        # the checkpoint's LLC writes may push dirty LLC victims to PCM past the budget
        return base.replace(br_enabled=False, strict_capacitor=False)
    if key == "baseline-1":
        return _unbounded(base, write_policy=WritePolicy.WRITE_THROUGH)
    if key == "baseline-2":
        return _unbounded(base, write_policy=WritePolicy.WRITE_BACK)
    if key == "baseline-3":
        return _unbounded(base, write_policy=WritePolicy.WRITE_BACK, l1_size_bytes=4 * 1024)
    if key == "architecture-1":
        # SRAM LLC: volatile, flushed to PCM with the L1 at every failure
        return _unbounded(
            base, write_policy=WritePolicy.WRITE_BACK, llc_volatile=True,
            sttram_read_cycles=base.sram_read_cycles, sttram_write_cycles=base.sram_write_cycles,
            llc_read_energy_nj=base.l1_read_energy_nj, llc_write_energy_nj=base.l1_write_energy_nj,
        )
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("proposed", "proposed-nobr", "baseline-1", "baseline-2", "baseline-3", "architecture-1")
VARIANTS = ("proposed", "proposed-nobr", "baseline-1", "baseline-2", "baseline-3")


def baseline_config(which: BaselineId | str, base: HierarchyConfig = PAPER_DEFAULT) -> HierarchyConfig:
    return preset(BaselineId(which).value, base)


def variant_config(base: HierarchyConfig, k: int, m: int, n: int, wc_bits: int,
                   policy: Policy | str, br_enabled: bool) -> HierarchyConfig:
    """A proposed-architecture point with its capacitor sized exactly for ``k``.

    LRW needs no write counter, so ``wc_bits`` is forced to 0 for it.
    """
    policy = Policy(policy)
    return base.replace(
        k_max_dirty=k, dbt_entries=m, wbq_entries=n,
        wc_bits=0 if policy is Policy.LRW else wc_bits,
        policy=policy, br_enabled=br_enabled, dbt_enabled=True,
        write_policy=WritePolicy.WRITE_BACK,
        strict_capacitor=br_enabled,
        e_capacitor_nj=capacitor_for(k, base.e_reg_file_nj, base.llc_write_energy_nj),
    )
