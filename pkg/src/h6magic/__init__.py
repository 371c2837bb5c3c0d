"""Simulation toolkit for magic-state preparation in the [[6,2,2]] H6 code."""

__version__ = "0.1.0"

from .circuit import Circuit, CircuitBuilder, Op, parse, serialize
from .codes import code_h6, code_iceberg, switch_mapping
from .noise import NoiseModel, annotate, h1_ratio
from .pauli import PauliString

__all__ = [
    "Circuit",
    "CircuitBuilder",
    "NoiseModel",
    "Op",
    "PauliString",
    "annotate",
    "code_h6",
    "code_iceberg",
    "h1_ratio",
    "parse",
    "serialize",
    "switch_mapping",
]
