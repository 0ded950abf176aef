"""Exception hierarchy.

Every error carries a stable ``code`` string and an ``exit_status`` used by the
command-line front end, so failures are machine-distinguishable.
"""


class SeqBellError(Exception):
    code = "error"
    exit_status = 1


class InvalidAxisError(SeqBellError, ValueError):
    code = "invalid-axis"
    exit_status = 2


class InvalidUnitaryError(SeqBellError, ValueError):
    code = "invalid-unitary"
    exit_status = 2


class InvalidStateError(SeqBellError, ValueError):
    code = "invalid-state"
    exit_status = 2


class ConfigError(SeqBellError, ValueError):
    """Bad user-supplied configuration, detected before any computation."""

    code = "invalid-config"
    exit_status = 2


class ProductStateError(SeqBellError, ValueError):
    """A quantity is undefined because the state carries no entanglement."""

    code = "product-state"
    exit_status = 3


class DegenerateBranchError(SeqBellError, ValueError):
    code = "degenerate-branch"
    exit_status = 3


class ScheduleViolationError(SeqBellError, ValueError):
    """A noise parameter falls outside ``(0, F(theta))`` for some branch."""

    code = "schedule-violation"
    exit_status = 4

    def __init__(self, message, history=None, report=None):
        super().__init__(message)
        self.history = history
        self.report = report


class IncompleteLevelError(SeqBellError, ValueError):
    code = "incomplete-level"
    exit_status = 3


class InvariantViolation(SeqBellError):
    """Raised by the CLI when a computed ledger flags a broken invariant."""

    code = "invariant-violation"
    exit_status = 5
