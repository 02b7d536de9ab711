"""Deterministic single-cell downlink scheduler comparison simulator."""

from .channel import ChannelParams, UserLink
from .engine import SimConfig, SimResult, run, run_comparison
from .errors import ConfigError
from .metrics import MetricsLog, jain_index
from .sched import DpfaParams, VpfaParams

__all__ = [
    "ChannelParams",
    "ConfigError",
    "DpfaParams",
    "MetricsLog",
    "SimConfig",
    "SimResult",
    "UserLink",
    "VpfaParams",
    "jain_index",
    "run",
    "run_comparison",
]

__version__ = "0.1.0"
