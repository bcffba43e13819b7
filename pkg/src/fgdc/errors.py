"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible extents, channels, or dtypes."""


class FormatError(ValueError):
    """A file or byte stream does not match its documented layout."""


class DataError(ValueError):
    """Dataset contents violate a precondition (missing files, bad config)."""


class NumericalError(ArithmeticError):
    """A forward pass or gradient produced non-finite values."""
