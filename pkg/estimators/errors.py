"""
Exception hierarchy shared by the estimators, the benchmark harness and the CLI.
"""


class KdeError(Exception):
    """Base class for every error raised by this project."""


class DomainError(KdeError, ValueError):
    """A scalar or collection argument is outside its valid domain."""


class ShapeError(KdeError, ValueError):
    """Array dimensions do not agree."""


class DataError(KdeError, ValueError):
    """Input data is malformed: NaN/Inf entries, ragged rows, unparsable files."""


class StateError(KdeError, RuntimeError):
    """The model lacks the state an operation needs."""


class EnvelopeError(KdeError, RuntimeError):
    """A rejection-sampling proposal exceeded its envelope."""


class ConfigError(KdeError, ValueError):
    """Invalid configuration value."""
