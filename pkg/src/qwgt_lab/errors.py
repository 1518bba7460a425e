"""Exception types shared across the library and mapped to CLI exit codes."""

from __future__ import annotations


class QwgtLabError(Exception):
    """Base class for all library errors."""


class DimensionError(QwgtLabError, ValueError):
    """Operand lengths or shapes do not match."""


class InstanceTooLarge(QwgtLabError):
    """An enumeration cap or oracle guard would be exceeded."""

    def __init__(self, what: str, required: int, allowed: int) -> None:
        self.required = required
        self.allowed = allowed
        super().__init__(f"instance too large for {what}: requires {required}, cap is {allowed}")


class DomainError(QwgtLabError, ValueError):
    """Input lies outside the mathematical domain of the operation."""


class InputError(QwgtLabError, ValueError):
    """Malformed input file or literal."""
