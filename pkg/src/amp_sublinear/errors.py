"""Exception hierarchy shared by all modules."""


class AmpSublinearError(Exception):
    pass


class ParameterError(AmpSublinearError, ValueError):
    pass


class ResourceError(AmpSublinearError):
    pass


class NumericalError(AmpSublinearError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    pass


class NumericalDivergenceError(NumericalError):
    """A non-finite value appeared during an AMP iteration."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite value at iteration {iteration}")


class TransitionProximityError(NumericalError):
    """The RS minimizer jumps inside a finite-difference stencil."""
