"""Design and transient-simulation toolkit for generalized
switched-capacitor modular multilevel inverters."""

from .config import LoadModel, SystemConfig
from .control import LimiterConfig
from .switching import LevelCommand
from .waveform import WaveformRecord

__all__ = [
    "LoadModel",
    "SystemConfig",
    "LimiterConfig",
    "LevelCommand",
    "WaveformRecord",
]

__version__ = "0.1.0"
