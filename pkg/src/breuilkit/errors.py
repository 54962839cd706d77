"""Exception types shared across the package."""

from __future__ import annotations


class BreuilkitError(Exception):
    """Base class for library errors."""


class DomainError(BreuilkitError, ValueError):
    """Parameters lie outside the domain where an operation is defined."""


class GuardError(BreuilkitError, RuntimeError):
    """A brute-force computation would exceed its configured search budget."""


class InvariantViolation(BreuilkitError, AssertionError):
    """An internal consistency check failed; indicates a bug or corrupt input."""


class UnsupportedTower(DomainError):
    """The tower lacks data needed by the requested computation."""


def guard_limit(default: int) -> int:
    """Brute-force budget, scaled by the BREUILKIT_GUARD environment factor."""
    import os

    raw = os.environ.get("BREUILKIT_GUARD")
    if not raw:
        return default
    try:
        factor = float(raw)
    except ValueError as exc:
        raise DomainError(f"BREUILKIT_GUARD must be a number, got {raw!r}") from exc
    if factor <= 0:
        raise DomainError("BREUILKIT_GUARD must be positive")
    return int(default * factor)
