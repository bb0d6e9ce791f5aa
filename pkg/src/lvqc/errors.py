"""Exception types shared across the package."""


class LVQCError(Exception):
    """Base class for all package errors."""


class InvalidSizeError(LVQCError, ValueError):
    pass


class UnsupportedHamiltonianError(LVQCError, ValueError):
    """The Hamiltonian does not have the shape an operation needs (e.g. not nearest-neighbour)."""


class ParameterLayoutError(LVQCError, ValueError):
    pass


class CapacityError(LVQCError, MemoryError):
    """Requested dense object is beyond the configured size threshold.

    Callers should switch to the MPS backend.
    """


class ConstraintError(LVQCError, ValueError):
    """A size/depth constraint of the compilation protocol is violated."""


class NumericalIntegrityError(LVQCError, ArithmeticError):
    """A quantity left its admissible range by more than rounding can explain."""


class PlanInfeasibleError(LVQCError):
    def __init__(self, message, achievable_epsilon=None):
        super().__init__(message)
        self.achievable_epsilon = achievable_epsilon


class OptimizerError(LVQCError, RuntimeError):
    pass


class ProtocolInapplicableError(LVQCError, ValueError):
    """The requested protocol has no guarantee for this interaction range."""
