"""Local variational quantum compilation of 1D time-evolution operators."""
from .errors import (CapacityError, ConstraintError, InvalidSizeError, LVQCError,
                     NumericalIntegrityError, OptimizerError, ParameterLayoutError,
                     PlanInfeasibleError, UnsupportedHamiltonianError)
from .lattice import OPEN, PERIODIC, Lattice, LocalHamiltonian, PauliTerm, build_heisenberg_afm
from .circuits import SHARED, PER_GATE, ParameterVector, build_brickwork, trotter_params

__version__ = "0.1.0"
