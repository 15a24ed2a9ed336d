"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation (site outside region, p out of range)."""


class PreconditionError(ValueError):
    """A documented precondition on the configuration does not hold."""


class EnumerationCapError(RuntimeError):
    """An exhaustive computation was requested on a region above the size cap."""


class EstimationError(RuntimeError):
    """A Monte Carlo estimate could not be formed (e.g. zero accepted samples)."""


class DataQualityError(RuntimeError):
    """Estimated data violate a structural assumption of a fit."""
