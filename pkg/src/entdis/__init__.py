"""entdis: one-way LOCC distinguishability of maximally entangled qudit sets.

Builds generalized-Bell and block-unitary families of maximally entangled
states, proves one-way indistinguishability with machine-checkable
certificates (integer Fourier covers, forced scalar blocks), and decides
the distinguishable side numerically (witness search, POVM completion,
protocol simulation).
"""
from .version import __version__

from .gpauli import (
    PauliIndex,
    PhasedPauli,
    adjoint_product,
    all_indices,
    apply,
    omega,
    to_matrix,
    transpose_index,
)
from .states import (
    Theorem2Spec,
    UnitarySet,
    bell_set,
    check_maximally_entangled,
    entangled_vector,
    set_from_dict,
    set_to_dict,
    theorem1_indices,
    theorem1_set,
    theorem2_set,
    transpose_set,
)
from .certify import (
    BlockCertificate,
    CorrelationConstraintSystem,
    CoverCertificate,
    FeasibleSubspace,
    block_identity_prover,
    certificate_from_dict,
    certificate_to_dict,
    constraints_from_set,
    fourier_cover_prover,
    hermitian_feasible_subspace,
    scan_blocks,
    unitaries_hash,
    verify_certificate,
    verify_certificate_detailed,
)
from .search import (
    Decision,
    OptimizerConfig,
    Povm,
    Verdict,
    Witness,
    decide,
    decide_direction,
    decision_to_dict,
    orbit_povm,
    penalty,
    povm_completion,
    povm_identity_residual,
    povm_orthogonality_residual,
    simulate_protocol,
    witness_search,
)

__all__ = [
    "__version__",
    "PauliIndex",
    "PhasedPauli",
    "adjoint_product",
    "all_indices",
    "apply",
    "omega",
    "to_matrix",
    "transpose_index",
    "Theorem2Spec",
    "UnitarySet",
    "bell_set",
    "check_maximally_entangled",
    "entangled_vector",
    "set_from_dict",
    "set_to_dict",
    "theorem1_indices",
    "theorem1_set",
    "theorem2_set",
    "transpose_set",
    "BlockCertificate",
    "CorrelationConstraintSystem",
    "CoverCertificate",
    "FeasibleSubspace",
    "block_identity_prover",
    "certificate_from_dict",
    "certificate_to_dict",
    "constraints_from_set",
    "fourier_cover_prover",
    "hermitian_feasible_subspace",
    "scan_blocks",
    "unitaries_hash",
    "verify_certificate",
    "verify_certificate_detailed",
    "Decision",
    "OptimizerConfig",
    "Povm",
    "Verdict",
    "Witness",
    "decide",
    "decide_direction",
    "decision_to_dict",
    "orbit_povm",
    "penalty",
    "povm_completion",
    "povm_identity_residual",
    "povm_orthogonality_residual",
    "simulate_protocol",
    "witness_search",
]
