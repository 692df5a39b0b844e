"""Exception hierarchy for the toolkit."""


class EpecError(Exception):
    """Base class for all toolkit errors."""


class ParseError(EpecError):
    """Game or point file is syntactically malformed."""

    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.column = column


class SemanticError(EpecError):
    """Well-formed input that violates a model invariant."""


class CapabilityError(EpecError):
    """Requested operation exceeds what this implementation supports."""


class ContractViolation(EpecError):
    """An operation was called outside its stated precondition."""


class PreconditionError(EpecError):
    """User-supplied data fails a runtime precondition (e.g. infeasible point)."""


class InternalConsistencyError(EpecError):
    """A should-be-unreachable state; indicates an implementation bug."""
