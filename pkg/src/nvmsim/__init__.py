"""Trace-driven simulator for an SRAM / STT-RAM / PCM hierarchy under intermittent power."""

from .baselines import PRESETS, BaselineId, preset, variant_config
from .config import (
    PAPER_DEFAULT, ConfigError, HierarchyConfig, Policy, TraceError, WritePolicy, capacitor_for,
    derive_k, load_config,
)
from .engine import PowerSchedule, Simulator, UnsafeBackupError, run
from .oracle import check_consistency, oracle_run
from .stats import SimStats
from .trace import SyntheticSpec, generate_arrays, load_arrays, parse_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "PAPER_DEFAULT", "PRESETS", "BaselineId", "ConfigError", "HierarchyConfig", "Policy",
    "PowerSchedule", "SimStats", "Simulator", "SyntheticSpec", "TraceError", "UnsafeBackupError",
    "WritePolicy", "capacitor_for", "check_consistency", "derive_k", "generate_arrays",
    "load_arrays", "load_config", "oracle_run", "parse_trace", "preset", "run", "variant_config",
    "write_trace",
]
