"""Exception hierarchy for the cavitydyn package.

Every error raised by the library derives from :class:`CavityDynError`.
The three direct subclasses partition failures by origin so that the
command line layer can map them onto distinct exit codes:

* :class:`ParameterError` - invalid user input (parameters, configs),
* :class:`NumericError` - a numerical routine could not deliver its
  guaranteed accuracy or was called outside its domain,
* :class:`TruncationError` - a Fock-space basis was too small for the
  requested state or evolution.
"""


class CavityDynError(Exception):
    """Base class for all cavitydyn errors."""


class ParameterError(CavityDynError, ValueError):
    """Invalid parameter value or malformed configuration input."""


class ConfigError(ParameterError):
    """Configuration file could not be parsed or validated.

    The message identifies the offending section and key (and the line
    number when the underlying parser provides one).
    """


class NonPositiveInput(ParameterError):
    """An input that must be strictly positive was zero or negative."""


class NumericError(CavityDynError):
    """A numerical routine failed to meet its accuracy contract."""


class UnstableSystem(NumericError):
    """The classical drift matrix has eigenvalues off the imaginary axis.

    Carries the offending eigenvalues in ``args`` for diagnostics.
    """


class DegenerateSplitting(NumericError):
    """The two normal-mode frequencies coincide within tolerance.

    Quantities that require a finite beat period (time averages over
    beat windows, period extraction) cannot be computed in this limit.
    """


class UnsupportedVariant(NumericError):
    """A closed-form expression is not available for the chosen model variant."""


class DimensionMismatch(NumericError):
    """Operator and state dimensions are inconsistent."""


class GridTooNarrow(NumericError):
    """A spatial grid misses a non-negligible fraction of probability mass."""


class WindowTooShort(NumericError):
    """The sampled time window spans fewer beat periods than required."""


class InsufficientSpan(NumericError):
    """A time series is too short for the requested extraction."""


class StepTooLarge(NumericError):
    """The integrator step produced unacceptable drift in conserved quantities."""


class TruncationError(CavityDynError):
    """Base class for Fock-space truncation failures."""


class TruncationTooSmall(TruncationError):
    """State preparation or evolution leaked into the top basis levels.

    The message suggests a larger cutoff.
    """
