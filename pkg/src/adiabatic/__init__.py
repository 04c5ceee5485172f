"""Entropy from adiabatic accessibility: constructions, axiom checks and calibration."""

__version__ = "0.1.0"

from .states import Comparability, CompoundState, DomainError, StateRef, compose, scale  # noqa: E402,F401
from .oracles import AnalyticEntropy  # noqa: E402,F401
from .finite import FiniteRelation, parse_relation  # noqa: E402,F401
