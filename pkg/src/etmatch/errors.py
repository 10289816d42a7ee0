"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes, so library code should raise
the most specific class that applies.
"""


class EtmatchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EtmatchError):
    """An input file could not be parsed; carries a file/line locus."""

    def __init__(self, message: str, path: str = "", line: int | None = None):
        locus = path
        if line is not None:
            locus = f"{path}:{line}"
        super().__init__(f"{locus}: {message}" if locus else message)
        self.path = path
        self.line = line


class ValidationError(EtmatchError):
    """Structurally parseable input that violates a graph or config invariant."""


class ConfigError(EtmatchError):
    """Bad configuration key, value, or range."""


class TrainingDataError(EtmatchError):
    """Training set is degenerate (missing a class, empty, or unusable)."""


class ModelMismatchError(EtmatchError):
    """A stored model is incompatible with the requested prediction."""


class EvalInputError(EtmatchError):
    """Evaluation inputs are unusable (e.g. an empty reference alignment)."""
