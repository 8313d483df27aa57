"""Exception and warning types shared across the package."""


class SecrecyError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SecrecyError, ValueError):
    """A parameter violates a type invariant."""


class DegenerateEta(ValidationError):
    """eta sits at the point where the integer-mu expansion is singular (H = 0)."""


class DomainError(SecrecyError, ValueError):
    """Argument outside the domain of a special function."""


class PoleError(DomainError):
    """Gamma-function pole hit (nonpositive integer argument)."""


class NonConvergent(SecrecyError, ArithmeticError):
    """Quadrature missed its error target within the evaluation budget."""

    def __init__(self, message, value=None, abs_error=None):
        super().__init__(message)
        self.value = value
        self.abs_error = abs_error


class SeriesDiverged(SecrecyError, ArithmeticError):
    """A truncated ascending series is still growing at the requested length."""


class ParseError(SecrecyError, ValueError):
    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.line = line
        self.field = field


class MissingEngine(SecrecyError, ValueError):
    """A comparison needs both engines but the table only has one."""


class CancellationWarning(UserWarning):
    """A term-wise assembly drifted away from the direct-quadrature reference."""
