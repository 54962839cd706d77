"""Exact computations with Breuil modules carrying tame descent data."""

from __future__ import annotations

from .errors import BreuilkitError, DomainError, GuardError, InvariantViolation, UnsupportedTower
from .upoly import TameTower

__version__ = "0.1.0"

__all__ = ["BreuilkitError", "DomainError", "GuardError", "InvariantViolation", "TameTower", "UnsupportedTower"]
