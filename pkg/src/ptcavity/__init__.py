"""Spectral engine for PT-symmetry breaking in degenerate disk and sphere cavities."""
from .basis import BasisSpec, DiskMode, Geometry, Parity, SphereMode, enumerate_basis
from .coupling import CouplingSystem, assemble
from .profiles import GainLossProfile, Piece, discover_group, preset
from .spectrum import classify_phase, solve_at
from .sweep import SpectrumTrace, TransitionEvent, sweep
from .symmetry import SymmetryElement, SymmetryGroup, generate, selection_rule

__version__ = "0.1.0"

__all__ = [
    "BasisSpec", "DiskMode", "Geometry", "Parity", "SphereMode", "enumerate_basis",
    "CouplingSystem", "assemble", "GainLossProfile", "Piece", "discover_group", "preset",
    "classify_phase", "solve_at", "SpectrumTrace", "TransitionEvent", "sweep",
    "SymmetryElement", "SymmetryGroup", "generate", "selection_rule",
]
