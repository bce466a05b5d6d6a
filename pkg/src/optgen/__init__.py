"""Optimal QFI generators for symmetric SU(n) probes."""

from .connection import ConnectionSolution, pseudoinverse, solve_connection, spectra_match
from .dynamics import (DensityMatrix, HamiltonianSpec, StateVector, coherent_spin_state, evolve,
                       oat_analytic, su4_initial_state)
from .errors import (ConfigError, NotNormalizedError, NumericalError, OptgenError, ResourceError,
                     SpaceMismatchError, SpectrumMismatchError)
from .multiparam import find_commuting_sets, uhlmann_curvature
from .qfim import diagonalize, optimal_generator, qfi_along, qfim_mixed, qfim_pure, qgt
from .su_basis import (HermitianOperator, LieBasis, SymmetricSpace, build_lie_basis,
                       decompose_operator, enumerate_space, transition_operator)

__version__ = "0.1.0"

__all__ = [
    "ConnectionSolution", "pseudoinverse", "solve_connection", "spectra_match",
    "DensityMatrix", "HamiltonianSpec", "StateVector", "coherent_spin_state", "evolve",
    "oat_analytic", "su4_initial_state",
    "ConfigError", "NotNormalizedError", "NumericalError", "OptgenError", "ResourceError",
    "SpaceMismatchError", "SpectrumMismatchError",
    "find_commuting_sets", "uhlmann_curvature",
    "diagonalize", "optimal_generator", "qfi_along", "qfim_mixed", "qfim_pure", "qgt",
    "HermitianOperator", "LieBasis", "SymmetricSpace", "build_lie_basis", "decompose_operator",
    "enumerate_space", "transition_operator",
]
