"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI can emit
distinct error identifiers without string-matching messages.
"""


class HeatlossError(Exception):
    """Base class for all package errors."""

    code = "ERROR"


class SchemaError(HeatlossError):
    """A JSON/file input does not match its declared schema."""

    code = "SCHEMA_ERROR"


class ValidationError(HeatlossError):
    """A value, invariant, or precondition check failed."""

    code = "VALIDATION_ERROR"


class DimensionMismatchError(ValidationError):
    """Grids that must share dimensions do not."""

    code = "DIM_MISMATCH"


class PlacementError(HeatlossError):
    """Synthetic scene constraints could not be satisfied."""

    code = "INFEASIBLE_PLACEMENT"


class NonFiniteLossError(HeatlossError):
    """Optimization produced a non-finite loss (learning rate too large)."""

    code = "NON_FINITE_LOSS"
