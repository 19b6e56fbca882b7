"""Exception hierarchy shared by all modules."""


class BohrLawError(Exception):
    """Base class for every error raised by this package."""


class BaseMismatchError(BohrLawError):
    """Two frequencies (or a frequency and a polynomial) use different real bases."""


class LatticeError(BohrLawError):
    """A frequency has no integer coordinates over the lift lattice."""


class SpanError(BohrLawError):
    """A frequency lies outside the rational span of a basis."""

    def __init__(self, message, frequency=None):
        super().__init__(message)
        self.frequency = frequency


class DomainError(BohrLawError, ValueError):
    """An argument is outside the admissible domain (negative level, flux range...)."""


class InputError(BohrLawError, ValueError):
    """Malformed input: non-finite samples, bad JSON, inconsistent shapes."""


class ContinuityError(InputError):
    """A piecewise flux is discontinuous at an interior breakpoint."""


class CFLError(BohrLawError):
    """A time step violates the monotonicity (CFL) bound."""

    def __init__(self, message, required_dt):
        super().__init__(message)
        self.required_dt = required_dt


class ConfigError(BohrLawError):
    """An experiment configuration is inconsistent."""
