"""Exception types shared across the package."""


class FreqestError(Exception):
    """Base class for all freqest errors."""


class ConfigInvalid(FreqestError):
    """A configuration violates one of its invariants."""


class NonFiniteState(FreqestError):
    """A state variable became NaN/Inf (or blew past the divergence guard) during integration."""

    def __init__(self, message: str, t: float | None = None, variable: str | None = None):
        super().__init__(message)
        self.t = t
        self.variable = variable


class NonFiniteSample(FreqestError):
    """A sample fed to a streaming operation is NaN/Inf."""


class NonFiniteInput(FreqestError):
    """An input to a pure field evaluation is NaN/Inf."""


class EmptyTrace(FreqestError):
    """A metric was requested on a trace with no recorded rows."""


class NonPositiveWindow(FreqestError):
    """A window length must be strictly positive."""


class UnknownAxis(FreqestError):
    """Sweep axis name is not one of the sweepable parameters."""
