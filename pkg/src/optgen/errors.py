"""Exception types raised across the package."""


class OptgenError(Exception):
    """Base class for all package errors."""


class ResourceError(OptgenError):
    """A requested representation space exceeds the configured size limit."""


class SpaceMismatchError(OptgenError, ValueError):
    """Operands live on different symmetric spaces or have mismatched shapes."""


class NotNormalizedError(OptgenError, ValueError):
    pass


class SpectrumMismatchError(OptgenError):
    """Raised when two operators cannot be unitarily connected.

    Both sorted spectra are attached so callers can report the mismatch.
    """

    def __init__(self, message, spectrum_g, spectrum_z):
        super().__init__(message)
        self.spectrum_g = spectrum_g
        self.spectrum_z = spectrum_z


class NumericalError(OptgenError):
    """An eigensolver or SVD failed, or a result violated a hard invariant."""


class ConfigError(OptgenError, ValueError):
    """Invalid scenario configuration. ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
