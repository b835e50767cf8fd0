"""Exception hierarchy shared by every module."""


class DynProbitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(DynProbitError, ValueError):
    """Model specification has wrong dimensions or non-(semi)definite covariances."""


class InvalidInputError(DynProbitError, ValueError):
    """Observed data or call arguments are malformed."""


class DomainError(DynProbitError, ValueError):
    """Numerical routine called outside its domain (non-finite input, sigma <= 0, ...)."""


class DegenerateModelError(DynProbitError):
    """Model implies a state with zero prior variance."""


class CapacityError(DynProbitError):
    """Rejection sampler exhausted its attempt budget.

    Retryable: switch the orthant sampler to the Gibbs strategy or raise
    ``max_rejection_attempts``.
    """


class DegenerateWeightsError(DynProbitError):
    """Importance weights collapsed; increase the number of proposal draws."""


class NumericalError(DynProbitError):
    """A factorization or fixed-point quantity left its admissible range."""
