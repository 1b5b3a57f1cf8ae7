"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class AttackPlanError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AttackPlanError):
    """Malformed source text. Carries a 1-based line/column inside the offending token."""

    def __init__(self, message: str, line: int, col: int, path: str | None = None):
        self.line = line
        self.col = col
        self.path = path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class ValidationError(AttackPlanError):
    """Structurally valid input that violates a domain/scenario rule."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnknownPredicateError(ValidationError):
    pass


class SortMismatchError(ValidationError):
    pass


class UnboundVariableError(AttackPlanError):
    pass


class HorizonExceededError(AttackPlanError):
    """Reachability search hit the depth bound before the question was decided."""


class PreconditionViolationError(AttackPlanError):
    """An action was applied in a state that does not satisfy its precondition.

    Signals an engine bug: the planner must never select such an action.
    """


class EmptyFrontierError(AttackPlanError):
    pass


class MalformedModelReplyError(AttackPlanError):
    pass


class ParserMismatchError(AttackPlanError):
    """Observation routed to the rule perceptor without a recognized format tag."""


class UnboundPlaceholderError(AttackPlanError):
    pass


class BackendUnavailableError(AttackPlanError):
    pass
