"""Hypergraph symmetry finding and symmetry-breaking augmentation around GWL-1 refinement."""

from .core import Hypergraph, Permutation, build
from .refine import ColorHistory, gwl1, wl1_clique
from .symmetry import SymmetryReport, find_symmetries

__all__ = ["Hypergraph", "Permutation", "build", "ColorHistory", "gwl1", "wl1_clique",
           "SymmetryReport", "find_symmetries"]
__version__ = "0.1.0"
