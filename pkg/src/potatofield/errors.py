"""Exception hierarchy for the potatofield package."""


class PotatoFieldError(Exception):
    """Base class for all potatofield errors."""


# --- file ingestion ---------------------------------------------------------

class MalformedFile(PotatoFieldError):
    """Ragged rows, non-numeric cells or duplicate channel names."""


class EmptyFile(PotatoFieldError):
    """File contains no header or no data rows."""


class LengthMismatch(PotatoFieldError):
    """Label/mask length does not match the epoch count."""


class InvalidLabelValue(PotatoFieldError):
    """Label entry is not 0 or 1."""


class UnknownChannel(PotatoFieldError):
    """Config names a channel absent from the recording."""


class BandOutOfRange(PotatoFieldError):
    """Frequency band exceeds the Nyquist limit or is empty."""


class EmptyField(PotatoFieldError):
    """Config defines no potatoes."""


class InvalidSpec(PotatoFieldError):
    """Synthetic-data spec violates its invariants."""


# --- segmentation and filtering ---------------------------------------------

class DurationTooLong(PotatoFieldError):
    """Epoch duration longer than the recording; zero epochs would result."""


class CutoffOutOfRange(PotatoFieldError):
    """Filter cutoff not strictly inside (0, Nyquist)."""


class TooShort(PotatoFieldError):
    """Too few samples to filter (edge transients would dominate)."""


class AllZeroSignal(PotatoFieldError):
    """Recording has no non-zero FRMS value; the outlier gate is undefined."""


# --- SPD geometry -----------------------------------------------------------

class RankDeficient(PotatoFieldError):
    """Covariance matrix singular beyond repair (flat/dead channel subset)."""


class DimensionMismatch(PotatoFieldError):
    """Matrix or mask dimensions do not agree."""


# --- statistics -------------------------------------------------------------

class NonPositiveDistance(PotatoFieldError):
    """Geometric statistics require strictly positive distances."""


class EmptyInput(PotatoFieldError):
    """Operation requires a non-empty input."""


class OutOfRangeP(PotatoFieldError):
    """p-value not strictly inside (0, 1)."""


class ZeroVariance(PotatoFieldError):
    """Effect size undefined: pooled standard deviation is zero."""


# --- knee detection and fitting ----------------------------------------------

class TooFewPoints(PotatoFieldError):
    """Knee detection needs at least five points."""


class TooFewEpochs(PotatoFieldError):
    """Not enough epochs to fit a potato."""


class TooFewCleanEpochs(PotatoFieldError):
    """Fewer than five epochs survive the outlier gate."""
