"""Hierarchy configuration, capacitor sizing and address arithmetic.

Every other module reads its geometry, latency and energy constants from a
:class:`HierarchyConfig`.  Defaults are the 32KB-L1 / 256KB-LLC / 128MB-PCM
system with the NVSim per-access figures for SRAM, STT-RAM and PCM.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import os
from dataclasses import dataclass, fields
from decimal import Decimal
from pathlib import Path
from typing import Any, Mapping

WORD_BYTES = 4


class ConfigError(ValueError):
    """Raised for configurations the simulator refuses to run."""


class TraceError(ValueError):
    """Raised for malformed or out-of-range trace input."""


class Policy(str, enum.Enum):
    LFW = "lfw"
    LRW = "lrw"


class LrwEvict(str, enum.Enum):
    MOST_RECENT = "most_recent"
    LEAST_RECENT = "least_recent"


class WritePolicy(str, enum.Enum):
    WRITE_BACK = "write_back"
    WRITE_THROUGH = "write_through"


@dataclass(frozen=True)
class HierarchyConfig:
    # geometry
    l1_size_bytes: int = 32 * 1024
    l1_assoc: int = 4
    llc_size_bytes: int = 256 * 1024
    llc_assoc: int = 16
    block_size_bytes: int = 64
    mem_size_bytes: int = 128 * 1024 * 1024
    # latencies, cycles at 2ns
    sram_read_cycles: int = 1
    sram_write_cycles: int = 2
    sttram_read_cycles: int = 2
    sttram_write_cycles: int = 10
    pcm_read_cycles: int = 35
    pcm_write_cycles: int = 100
    # dynamic energy per block access, nJ
    l1_read_energy_nj: float = 0.006
    l1_write_energy_nj: float = 0.002
    llc_read_energy_nj: float = 0.123
    llc_write_energy_nj: float = 0.542
    pcm_read_energy_nj: float = 1.553
    pcm_write_energy_nj: float = 6.9365  # mean of SET 6.927 and RESET 6.946
    # dirty-block bound
    k_max_dirty: int = 16
    dbt_entries: int = 12
    wbq_entries: int = 4
    wc_bits: int = 6
    policy: Policy = Policy.LFW
    lrw_evict: LrwEvict = LrwEvict.MOST_RECENT
    write_policy: WritePolicy = WritePolicy.WRITE_BACK
    dbt_enabled: bool = True
    # intermittent power
    br_enabled: bool = True
    br_fixed_image: bool = True
    llc_volatile: bool = False
    strict_capacitor: bool = True
    e_reg_file_nj: float = 0.542
    e_capacitor_nj: float = 9.214
    # trace interpretation
    mem_ops_per_instruction: float = 0.4
    allow_address_wrap: bool = False

    def __post_init__(self) -> None:
        # accept plain strings for the enum fields (config files, CLI flags)
        for name, kind in (("policy", Policy), ("lrw_evict", LrwEvict), ("write_policy", WritePolicy)):
            value = getattr(self, name)
            if not isinstance(value, kind):
                try:
                    object.__setattr__(self, name, kind(str(value).lower()))
                except ValueError:
                    raise ConfigError(f"{name}: unknown value {value!r}") from None

    # derived quantities -------------------------------------------------

    @property
    def l1_blocks(self) -> int:
        return self.l1_size_bytes // self.block_size_bytes

    @property
    def l1_sets(self) -> int:
        return self.l1_blocks // self.l1_assoc

    @property
    def llc_sets(self) -> int:
        return self.llc_size_bytes // self.block_size_bytes // self.llc_assoc

    @property
    def lrw_bits(self) -> int:
        """Width of the recency field: ceil(log2(M)) bits."""
        return math.ceil(math.log2(self.dbt_entries)) if self.dbt_entries > 1 else 0

    @property
    def br_capacity(self) -> int:
        """Block slots in the backup region (the register file record is extra)."""
        return self.k_max_dirty

    def replace(self, **changes: Any) -> "HierarchyConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "HierarchyConfig":
        """Check every structural invariant; returns self so calls chain."""
        for name in ("l1_size_bytes", "llc_size_bytes", "block_size_bytes", "mem_size_bytes", "l1_assoc", "llc_assoc"):
            if not _is_pow2(getattr(self, name)):
                raise ConfigError(f"{name} must be a power of two, got {getattr(self, name)}")
        if self.block_size_bytes < WORD_BYTES:
            raise ConfigError(f"block_size_bytes must be at least {WORD_BYTES}")
        if self.l1_blocks < self.l1_assoc or self.l1_blocks % self.l1_assoc:
            raise ConfigError("l1_assoc must evenly divide the number of L1 blocks")
        llc_blocks = self.llc_size_bytes // self.block_size_bytes
        if llc_blocks < self.llc_assoc or llc_blocks % self.llc_assoc:
            raise ConfigError("llc_assoc must evenly divide the number of LLC blocks")
        for name in (f.name for f in fields(self) if f.name.endswith("_cycles")):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        for name in (f.name for f in fields(self) if f.name.endswith("_nj")):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.llc_write_energy_nj <= 0:
            raise ConfigError("llc_write_energy_nj must be positive")
        if self.k_max_dirty != self.dbt_entries + self.wbq_entries:
            raise ConfigError(
                f"K = M + N violated: k_max_dirty={self.k_max_dirty}, "
                f"dbt_entries={self.dbt_entries}, wbq_entries={self.wbq_entries}"
            )
        if self.dbt_enabled and self.dbt_entries < 1:
            raise ConfigError("dbt_entries must be at least 1 when the DBT is enabled")
        if self.br_enabled and not self.dbt_enabled and self.write_policy is WritePolicy.WRITE_BACK:
            raise ConfigError("a backup region needs the DBT dirty bound (or a write-through L1)")
        if self.wbq_entries < 0:
            raise ConfigError("wbq_entries must be nonnegative")
        if self.dbt_enabled and self.policy is Policy.LFW and self.wc_bits < 1:
            raise ConfigError("wc_bits must be at least 1 for the LFW policy")
        if self.dbt_enabled and self.k_max_dirty > self.l1_blocks:
            raise ConfigError("k_max_dirty cannot exceed the number of L1 blocks")
        if not 0 < self.mem_ops_per_instruction <= 1:
            raise ConfigError("mem_ops_per_instruction must be in (0, 1]")
        affordable = derive_k(self.e_capacitor_nj, self.e_reg_file_nj, self.llc_write_energy_nj)
        if affordable < self.k_max_dirty:
            raise ConfigError(
                f"capacitor of {self.e_capacitor_nj} nJ backs up only {affordable} blocks, "
                f"k_max_dirty={self.k_max_dirty}"
            )
        return self

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {f.name: _plain(getattr(self, f.name)) for f in fields(self)}

    def canonical(self) -> str:
        """One ``key = value`` line per field, in declaration order."""
        return "".join(f"{k} = {format_value(v)}\n" for k, v in self.to_dict().items())

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any], base: "HierarchyConfig | None" = None) -> "HierarchyConfig":
        base = base or cls()
        known = {f.name: f for f in fields(cls)}
        changes = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            changes[key] = coerce(known[key].type, raw, key)
        return dataclasses.replace(base, **changes)


PAPER_DEFAULT = HierarchyConfig()


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _plain(value: Any) -> Any:
    return value.value if isinstance(value, enum.Enum) else value


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(_plain(value))


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def coerce(type_name: Any, raw: Any, key: str = "value") -> Any:
    """Convert a config-file string to the field's declared type."""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    type_name = getattr(type_name, "__name__", type_name)
    try:
        if type_name == "bool":
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if type_name == "int":
            return int(text, 0)
        if type_name == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type_name}") from None
    return text


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


BUILTIN_CONFIG_DIR = Path(__file__).resolve().parent / "configs"


def load_config(path: str | os.PathLike[str], env: Mapping[str, str] | None = None,
                overrides: Mapping[str, Any] | None = None) -> HierarchyConfig:
    """Read a config file, then apply ``SIM_<KEY>`` environment and explicit overrides."""
    p = Path(path)
    if not p.exists() and (BUILTIN_CONFIG_DIR / p.name).exists():
        p = BUILTIN_CONFIG_DIR / p.name
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values: dict[str, Any] = parse_kv_text(text, str(path))
    values.update(env_overrides(env))
    if overrides:
        values.update(overrides)
    return HierarchyConfig.from_mapping(values)


def env_overrides(env: Mapping[str, str] | None = None) -> dict[str, str]:
    env = os.environ if env is None else env
    names = {f.name for f in fields(HierarchyConfig)}
    out = {}
    for key, value in env.items():
        if key.startswith("SIM_") and key[4:].lower() in names:
            out[key[4:].lower()] = value
    return out


# capacitor arithmetic ------------------------------------------------------

def _dec(x: float) -> Decimal:
    # decimal literal semantics: 8.672 / 0.542 must give exactly 16
    return Decimal(repr(float(x)))


def derive_k(e_capacitor_nj: float, e_reg_file_nj: float, e_w_sttram_nj: float) -> int:
    """Largest number of blocks the capacitor can back up after the register file.

    ``floor((E_capacitor - E_reg_file) / e_w)``.
    """
    if e_w_sttram_nj <= 0:
        raise ConfigError("per-block STT-RAM write energy must be positive")
    if e_capacitor_nj < e_reg_file_nj:
        raise ConfigError(
            f"capacitor ({e_capacitor_nj} nJ) cannot cover the register file ({e_reg_file_nj} nJ); "
            "safe backup is impossible"
        )
    return int((_dec(e_capacitor_nj) - _dec(e_reg_file_nj)) // _dec(e_w_sttram_nj))


def capacitor_for(k: int, e_reg_file_nj: float, e_w_sttram_nj: float) -> float:
    """Smallest capacitor energy for which :func:`derive_k` returns ``k``."""
    return float(_dec(e_reg_file_nj) + k * _dec(e_w_sttram_nj))


def backup_energy_full_l1(config: HierarchyConfig) -> float:
    """Worst-case backup energy of an unbounded write-back L1: every block dirty."""
    return config.l1_blocks * config.llc_write_energy_nj


def within_budget(energy_nj: float, budget_nj: float) -> bool:
    return energy_nj <= budget_nj or math.isclose(energy_nj, budget_nj, rel_tol=1e-12, abs_tol=1e-12)


# address arithmetic --------------------------------------------------------

@dataclass(frozen=True)
class Geometry:
    block_size_bytes: int
    num_sets: int
    mem_size_bytes: int

    @property
    def offset_bits(self) -> int:
        return self.block_size_bytes.bit_length() - 1

    @property
    def set_bits(self) -> int:
        return self.num_sets.bit_length() - 1

    @classmethod
    def l1(cls, config: HierarchyConfig) -> "Geometry":
        return cls(config.block_size_bytes, config.l1_sets, config.mem_size_bytes)

    @classmethod
    def llc(cls, config: HierarchyConfig) -> "Geometry":
        return cls(config.block_size_bytes, config.llc_sets, config.mem_size_bytes)


def decompose_address(addr: int, geometry: Geometry) -> tuple[int, int, int]:
    """Split a byte address into ``(tag, set_index, block_offset)``."""
    if not 0 <= addr < geometry.mem_size_bytes:
        raise TraceError(f"address {addr:#x} outside memory of {geometry.mem_size_bytes} bytes")
    offset = addr & (geometry.block_size_bytes - 1)
    block = addr >> geometry.offset_bits
    return block >> geometry.set_bits, block & (geometry.num_sets - 1), offset


def recompose_address(tag: int, set_index: int, offset: int, geometry: Geometry) -> int:
    return (((tag << geometry.set_bits) | set_index) << geometry.offset_bits) | offset
