"""Exception types shared across the package.

Two failure categories map onto the CLI exit codes: rejected input (bad
parameters, dimension mismatches) and guard overflow (a computation whose
size limit would be exceeded).
"""


class InputError(ValueError):
    """Raised when an operation rejects its input."""


class GuardError(RuntimeError):
    """Raised when a size or time guard would be exceeded."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
