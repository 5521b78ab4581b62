"""Exception types shared across the library."""


class ValidationError(ValueError):
    """Bad input values: empty sequences, out-of-range ids, malformed files."""


class DimensionError(ValidationError):
    """Tensor shapes incompatible with the requested operation."""


class NumericalError(RuntimeError):
    """A computation produced a non-finite value."""
