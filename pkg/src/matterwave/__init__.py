"""Linearised quantum noise model of light-pulse atom interferometers."""
from .mode_algebra import (
    ExpSum,
    ModeKind,
    ModeRegistry,
    OperatorExpr,
    WeightKernel,
    coherent,
    commutator,
    covariance,
    vacuum_variance,
)
from .kernel import KernelParams, basis_change, evolve_fluctuations, propagate_kernel, transfer_matrix
from .interferometer import SequenceSpec, estimator, gw_phase_response, run_pair, run_sequence
from .budget import LabParams, error_budget, map_params, optimize_atom_number

__all__ = [
    "ExpSum", "ModeKind", "ModeRegistry", "OperatorExpr", "WeightKernel", "coherent", "commutator",
    "covariance", "vacuum_variance", "KernelParams", "basis_change", "evolve_fluctuations",
    "propagate_kernel", "transfer_matrix", "SequenceSpec", "estimator", "gw_phase_response",
    "run_pair", "run_sequence", "LabParams", "error_budget", "map_params", "optimize_atom_number",
]
__version__ = "0.1.0"
