"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class EmptyEstimateError(DomainError):
    """A conditional estimator was asked to average over an empty event."""


class FitError(RuntimeError):
    """A numerical fit failed to converge or is degenerate.

    ``diagnostics`` carries whatever the optimizer knew at the point of failure.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
