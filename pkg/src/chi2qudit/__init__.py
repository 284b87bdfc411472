"""Simulation of chi(2) three-wave-mixing gates on photon-number qudits."""

from .fock import (FockState, ModeSet, ModeSpec, StateVector, SubspaceBasis, enumerate_pump_subspace,
                   logical_qubit_basis, logical_qutrit_basis)
from .gates import Circuit, Gate, distance_up_to_phase, evolve
from .liealg import closure
from .operators import OperatorExpr, OperatorMatrix, chi2_generators, to_matrix
from .synthesis import PulseSequence, SynthesisProblem, synthesize

__version__ = "0.1.0"
__all__ = [
    "FockState", "ModeSet", "ModeSpec", "StateVector", "SubspaceBasis", "enumerate_pump_subspace",
    "logical_qubit_basis", "logical_qutrit_basis", "Circuit", "Gate", "distance_up_to_phase", "evolve",
    "closure", "OperatorExpr", "OperatorMatrix", "chi2_generators", "to_matrix", "PulseSequence",
    "SynthesisProblem", "synthesize",
]
