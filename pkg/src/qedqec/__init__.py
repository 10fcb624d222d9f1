"""Simulator for quantum error correction on a signal-based analog emulation device."""
from .errors import ConfigError, DegenerateError, InvalidArgumentError
from .qubit_core import PauliString, PureState

__all__ = ["ConfigError", "DegenerateError", "InvalidArgumentError", "PauliString", "PureState"]
__version__ = "0.1.0"
