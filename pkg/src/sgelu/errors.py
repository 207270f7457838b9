"""Exception types shared across the library."""


class ConfigurationError(ValueError):
    """Bad shapes, ranges, or incompatible settings caught before compute."""


class DataFormatError(ValueError):
    """Malformed IDX input (wrong magic, truncation, count mismatch)."""


class NumericalDivergenceError(ArithmeticError):
    """A forward pass or loss produced NaN/Inf; names the offending layer."""

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer
