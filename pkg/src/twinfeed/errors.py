"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Two spectra (or a spectrum and a gain profile) live on different frequency grids."""


class CsdModelError(ValueError):
    """A requested cross-spectral density matrix is not positive semidefinite."""


class TraceAlignmentError(ValueError):
    """Two photocurrent traces differ in sample rate or length."""


class TraceLengthError(ValueError):
    """A trace is too short for the requested spectral estimate."""


class SubtractionError(ValueError):
    """A dark (electronic-noise) spectrum is not strictly below the signal spectrum."""


class NoOscillationError(RuntimeError):
    """No statistically significant spectral oscillation was found in the fit band."""


class ConfigError(ValueError):
    """A configuration file is missing, malformed, or contains invalid values."""
