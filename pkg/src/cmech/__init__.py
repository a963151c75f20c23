"""Complexified Hamiltonian mechanics toolkit."""

__version__ = "0.1.0"

from .canon import Hamiltonian, PhaseState
from .hamexpr import ParamSet, parse

__all__ = ["Hamiltonian", "ParamSet", "PhaseState", "parse", "__version__"]
