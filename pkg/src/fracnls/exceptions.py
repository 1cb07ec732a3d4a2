class FracNLSError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(FracNLSError, ValueError):
    """Parameters fall outside the window an operation is defined on."""


class DegenerateInputError(FracNLSError, ValueError):
    """Input field is zero (or a denominator vanishes)."""


class DegenerateSeedError(DegenerateInputError):
    """An iterative solver collapsed to the zero field."""


class DomainError(FracNLSError, ValueError):
    """A resampled field would not fit in the periodic box."""


class ConfigError(FracNLSError, ValueError):
    """Malformed or unknown entries in an experiment configuration."""
