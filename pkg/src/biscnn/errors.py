"""Exception hierarchy shared across the package."""


class BiscnnError(Exception):
    """Base class for all package errors."""


class RejectedInputError(BiscnnError, ValueError):
    """Shapes or values that a kernel cannot accept."""


class WindowTooShortError(RejectedInputError):
    """Window has fewer rows than the filter width; pad before convolving."""


class StateError(BiscnnError, RuntimeError):
    """An operation was invoked out of order (e.g. backward before forward)."""


class ParseError(BiscnnError, ValueError):
    """Malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class EmptyCorpusError(BiscnnError, ValueError):
    pass


class AlignmentError(BiscnnError, ValueError):
    """Gold and predicted label sequences do not line up."""


class NonFiniteGradientError(BiscnnError, FloatingPointError):
    def __init__(self, param, example_index):
        self.param = param
        self.example_index = example_index
        super().__init__(f"non-finite gradient for parameter {param!r} at example {example_index}")


class ConfigError(BiscnnError, ValueError):
    pass
