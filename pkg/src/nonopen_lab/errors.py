"""Exception hierarchy and process exit codes for nonopen-lab.

Every error derives from a built-in class so callers can catch broadly:
configuration and parameter problems are ``ValueError``s, representation
mismatches are ``TypeError``s, and numerical breakdowns are
``ArithmeticError``s.
"""

from __future__ import annotations

from enum import IntEnum


class ExitCode(IntEnum):
    """Stable process exit codes for the CLI."""

    OK = 0
    PROPERTY_FAILURE = 1
    CONFIGURATION = 2


class ConfigurationError(ValueError):
    """A model/gauge pair or run configuration is not admissible."""


class ParameterError(ValueError):
    """A scalar parameter lies outside its domain."""


class NormalizationError(ParameterError):
    """A vector that must have unit strong norm does not."""


class PreconditionError(ValueError):
    """An operation was called outside its precondition."""


class RepresentationError(TypeError):
    """A vector does not match the representation of its space model."""


class NotInvertibleError(ArithmeticError):
    """The derivative is requested to be inverted at the critical point."""


class NumericalRangeError(ArithmeticError):
    """A computation left the range representable in binary64."""
