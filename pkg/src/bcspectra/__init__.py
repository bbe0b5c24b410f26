"""General boundary conditions and bound-state spectra of 1D polynomial continuum models."""

from .boundary import (
    Admissible,
    BoundaryCondition,
    Insufficient,
    NotCurrentConserving,
    SymmetricOnly,
    classify_raw,
    classify_relations,
    haar_unitary,
    raw_relation_matrix,
    reparameterize_length,
    standard_bc,
    symmetric_only_bc,
    u1_bc_from_angle,
)
from .current import (
    BoundaryTraceVector,
    CurrentDiagonalization,
    TraceLayout,
    build_current_matrix,
    current_diagonalization,
    diagonalize_current,
    sign_structure_invariance,
)
from .errors import ConfigError, DomainError
from .hamiltonian import PolyMatrixHamiltonian, bulk_bands, evaluate, gap_window, new_hamiltonian
from .models import LinearTwoBandModel, PotentialWellModel, QuadraticModel
from .spectra import (
    BoundStateResult,
    ParticularSolution,
    SegmentState,
    boundary_matrix,
    decaying_basis,
    momentum_roots,
    solve_half_line,
    solve_segment,
    wavefunction,
)

__version__ = "0.1.0"

__all__ = [
    "Admissible",
    "BoundStateResult",
    "BoundaryCondition",
    "BoundaryTraceVector",
    "ConfigError",
    "CurrentDiagonalization",
    "DomainError",
    "Insufficient",
    "LinearTwoBandModel",
    "NotCurrentConserving",
    "ParticularSolution",
    "PolyMatrixHamiltonian",
    "PotentialWellModel",
    "QuadraticModel",
    "SegmentState",
    "SymmetricOnly",
    "TraceLayout",
    "boundary_matrix",
    "build_current_matrix",
    "bulk_bands",
    "classify_raw",
    "classify_relations",
    "current_diagonalization",
    "decaying_basis",
    "diagonalize_current",
    "evaluate",
    "gap_window",
    "haar_unitary",
    "momentum_roots",
    "new_hamiltonian",
    "raw_relation_matrix",
    "reparameterize_length",
    "sign_structure_invariance",
    "solve_half_line",
    "solve_segment",
    "standard_bc",
    "symmetric_only_bc",
    "u1_bc_from_angle",
    "wavefunction",
]
