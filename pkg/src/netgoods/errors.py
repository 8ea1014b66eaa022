"""Exception hierarchy shared across the package."""


class NetgoodsError(Exception):
    """Base class for all package errors."""


class InputError(NetgoodsError):
    """Invalid user input: bad schema, violated invariant, unmet precondition."""


class DomainError(InputError):
    """A point falls outside a function's declared domain."""


class NumericsError(NetgoodsError):
    """A numerical procedure failed (divergence, iteration cap, singularity)."""


class ConvergenceError(NumericsError):
    """An iterative method exceeded its iteration budget without converging."""


class IntegrationError(NumericsError):
    """ODE integration produced a non-finite state.

    Carries the trajectory accumulated up to the last good state in
    ``last_good`` so callers can inspect where things went wrong.
    """

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class SingularMatrixError(NumericsError):
    """A linear system was singular or numerically unsolvable."""
