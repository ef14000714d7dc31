"""Permutation groups, coset graphs and the claim verifier for heptavalent
symmetric graphs with solvable stabilizers."""

from .perm import Permutation
from .bsgs import PermGroup, normalizer_scan, centralizer_scan

__version__ = "0.1.0"

__all__ = ["Permutation", "PermGroup", "normalizer_scan", "centralizer_scan"]
