"""Lattice walks with small steps confined to the three-quadrant cone.

Exact enumeration, functional-equation checks, the kernel pipeline of the
king model, its algebraic closed forms, guessing of algebraic equations and
asymptotic constants.
"""

from .errors import WalksError
from .model import StepSet, build_group, builtin

__all__ = ["StepSet", "WalksError", "build_group", "builtin"]
