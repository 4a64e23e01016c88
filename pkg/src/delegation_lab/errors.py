"""Error types shared across the library."""


class CapacityError(RuntimeError):
    """An exact enumeration would exceed its configured cap."""


class UnsupportedError(ValueError):
    """Structural preconditions of an operation do not hold."""
