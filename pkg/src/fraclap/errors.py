"""Shared exception types."""


class ConvergenceError(RuntimeError):
    """A series, quadrature or iteration failed to reach the requested accuracy."""


class BracketingError(RuntimeError):
    """Root bracketing failed; indicates a tolerance or bracket bug, not bad input."""
