"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """A formula was evaluated outside the domain where it is defined."""


class SingularityError(DomainError):
    """The point lies within the tolerance band of the metric's singular set."""

    def __init__(self, message, denominator=None, where=None):
        super().__init__(message)
        self.denominator = denominator
        self.where = where


class TimelikeError(DomainError):
    """The curve is not time-like (g(v, v) <= margin) at some parameter value."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class GenerationError(RuntimeError):
    """Random generation could not satisfy its postcondition."""


class IntegrationError(RuntimeError):
    """Proper-time quadrature hit an inadmissible parameter value."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where
