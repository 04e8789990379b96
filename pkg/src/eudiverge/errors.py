"""Exceptions raised by the workbench."""


class WorkbenchError(Exception):
    pass


class NoHaltingIndex(WorkbenchError):
    """No index in the requested range halted within the table budget."""


class FunctionNotTotalWithinBudget(WorkbenchError):
    """A comparison function failed to halt on some probed input."""


class SourceNotHaltedWithinBudget(WorkbenchError):
    """The source program of a G synthesis did not halt on the probed input."""


class SearchBudgetExceeded(WorkbenchError):
    """No natural up to the search budget satisfies the inverse-utility bound."""


class InconsistentCertificate(WorkbenchError):
    """Re-executing a certificate's witness contradicts a stored field."""


class BoundViolated(WorkbenchError):
    """An observed partial-sum increment exceeds the analytic tail bound."""


class FixedPointNotFound(WorkbenchError):
    """The fixed-point search exhausted its candidate range."""


class ConfigError(WorkbenchError):
    """Invalid experiment configuration."""


class PreconditionViolated(WorkbenchError):
    """An operation was called outside its documented precondition."""
