"""Exception hierarchy shared by the library and the command line front end."""


class AdsorbFracError(Exception):
    """Base class for all library errors."""


class DomainError(AdsorbFracError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class SingularPointError(DomainError):
    """A quantity is requested at a point where it diverges."""


class RangeError(AdsorbFracError, ArithmeticError):
    """A formula is evaluated outside the range where it is meaningful."""


class ModelValidityError(AdsorbFracError, ValueError):
    """Model parameters violate a physical or uniqueness constraint."""


class ConfigError(AdsorbFracError, ValueError):
    """A run configuration or mesh description is malformed or inconsistent."""


class ProvenanceError(AdsorbFracError, ValueError):
    """Data was produced with parameters that do not match the ones supplied."""


class AccuracyError(AdsorbFracError, ArithmeticError):
    """A numerical method failed to reach its accuracy target.

    Attributes
    ----------
    estimate : float
        Best available value.
    error_bound : float
        Estimated absolute error of ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error_bound=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
