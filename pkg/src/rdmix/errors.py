"""Exception types shared across the package."""

from __future__ import annotations


class RdmixError(Exception):
    """Base class for all package errors."""


class DomainError(RdmixError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedEntropy(DomainError):
    """Requested entropy family is not admissible for the given reaction orders."""


class NonConvergence(RdmixError):
    """Iterative solver failed to reach the requested tolerance."""

    def __init__(self, iterations: int, residual: float, message: str = ""):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            message or f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class NonPositivity(RdmixError):
    """Damped Newton could not keep the iterate above its positivity floor."""


class NewtonFailure(RdmixError):
    """Per-node implicit reaction solve failed."""

    def __init__(self, node: int, residual: float):
        self.node = node
        self.residual = residual
        super().__init__(f"reaction Newton failed at node {node} (residual {residual:.3e})")


class PositivityLoss(RdmixError):
    """A time step would produce a nonpositive concentration."""


class ThetaTooLarge(RdmixError):
    """Flatness number theta >= 1/2: no decay certificate in this regime."""

    def __init__(self, theta: float):
        self.theta = theta
        super().__init__(f"theta = {theta:.6g} >= 1/2; certificate unavailable")


class UnsupportedRegime(RdmixError):
    """No certificate covers the requested (alpha, beta, p) combination."""


class EmptyCurve(RdmixError):
    """A decay verification was requested on an empty sample sequence."""


class ParseError(RdmixError):
    """Configuration text could not be parsed or validated."""

    def __init__(self, line: int, key: str, message: str):
        self.line = line
        self.key = key
        super().__init__(f"line {line}: {key}: {message}")
