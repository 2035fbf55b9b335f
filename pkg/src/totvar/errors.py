"""Shared exception types."""


class NumericalError(RuntimeError):
    """A numerical step failed (singular covariance, invalid curvature, ...)."""
