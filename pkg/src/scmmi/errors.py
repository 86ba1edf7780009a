"""Exception hierarchy shared across the package."""


class ScmmiError(Exception):
    """Base class for all package errors."""


class InvalidLevelCountError(ScmmiError, ValueError):
    """Level count is not an odd integer >= 3."""


class InvalidLevelError(ScmmiError, ValueError):
    """Commanded output level is outside the reachable range."""


class InvalidStateError(ScmmiError, ValueError):
    """Switch vector does not map to any recognized connection state."""


class ConfigError(ScmmiError, ValueError):
    """Bad system configuration or unparsable config file."""


class BuildError(ScmmiError, RuntimeError):
    """Network could not be assembled (floating island, bad dimensions)."""


class SolverError(ScmmiError, RuntimeError):
    """Linear solve failed or the transient loop hit an inconsistent state."""


class InvalidPerturbationError(ScmmiError, ValueError):
    """Perturbation would drive a capacitor voltage negative."""


class AnalysisError(ScmmiError, ValueError):
    """Base class for waveform post-processing errors."""


class WindowError(AnalysisError):
    """Record does not contain an integer number of fundamental periods."""


class ZeroFundamentalError(AnalysisError):
    """Ratio metric is undefined because the fundamental magnitude is zero."""


class NeverSettledError(AnalysisError):
    """Channel never stays inside the requested band."""
