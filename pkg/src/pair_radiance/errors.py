"""Exception and warning types shared across the package."""


class PairRadianceError(Exception):
    """Base class for all package errors."""


class InvalidInputError(PairRadianceError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRegimeError(PairRadianceError, ValueError):
    """Physically inadmissible parameters (e.g. superluminal orbit)."""


class SingularInputError(PairRadianceError, ValueError):
    """The requested quantity is singular at the given arguments."""


class NumericalFailure(PairRadianceError, ArithmeticError):
    """Non-finite values or a violated numerical bound."""


class ConfigError(PairRadianceError):
    """Invalid run configuration. ``errors`` lists every violation found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NonrelativisticWarning(UserWarning):
    """Closed forms assume v_R << 1 and degrade above v_R ~ 0.1."""
