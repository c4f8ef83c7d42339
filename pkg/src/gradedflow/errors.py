"""Exception hierarchy shared by all modules."""


class GradedFlowError(Exception):
    """Base class for every error raised by this package."""


class ExpressionError(GradedFlowError):
    pass


class UnboundVariable(ExpressionError):
    def __init__(self, name):
        super().__init__(f"variable {name!r} has no assigned value")
        self.name = name


class DomainError(ExpressionError, ArithmeticError):
    pass


class ExpressionSyntaxError(ExpressionError, ValueError):
    """Malformed expression text; ``position`` is the 0-based offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SignatureMismatch(GradedFlowError):
    pass


class IndexNotDominated(GradedFlowError):
    pass


class DegreeError(GradedFlowError):
    pass


class DegreeMismatch(DegreeError):
    pass


class NotHomological(GradedFlowError):
    pass


class NonzeroValueForGradedTime(GradedFlowError):
    pass


class EvaluationError(GradedFlowError):
    pass


class BlowUp(GradedFlowError):
    """The underlying trajectory left every bounded region before the requested time."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class IllConditioned(GradedFlowError):
    pass


class MismatchBeyondTolerance(GradedFlowError):
    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class OutOfIntegratedRange(GradedFlowError):
    pass


class ParseError(GradedFlowError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class ValidationError(ParseError):
    pass


class TriangularityViolation(GradedFlowError):
    """Rates of low-weight coefficients depended on higher-weight state entries."""
