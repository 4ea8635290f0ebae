class SumprodError(Exception):
    """Base class for all errors raised by this package."""


class ResourceLimitError(SumprodError):
    """A request exceeds the configured capacity or memory budget."""


class FormatError(SumprodError, ValueError):
    """A serialized set is malformed (bad magic, truncation, trailing bytes)."""


class ExprError(SumprodError, ValueError):
    """A set expression failed to parse or refers to an unbound name."""


class ConstructionError(SumprodError):
    """A construction could not be completed.

    ``report`` carries whatever diagnostic data was gathered before the
    failure (first uncoverable target, worst defect ratio, ...).
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report if report is not None else {}
