"""Integrable Sp(2n) vertex models: R-matrices, fusion, transfer matrices and
thermodynamic-limit partition functions."""
from .algebra import ModelParams, RFamily, build_hamiltonian, check_r_identities, make_model, r_fundamental
from .errors import SpVertexError
from .fusion import fusion_hierarchy, load_appendix_basis
from .reps import RepLabel, rep_dimension
from .thermo import ground_state_energy, kappa_general, kappa_sp6, omega_general, omega_sp6
from .transfer import (
    LeadingBranch,
    TransferSpec,
    apply_transfer,
    build_transfer_dense,
    finite_kappa,
    interpolate_eigen_polynomial,
    leading_eigenvalue,
    polynomial_zeros,
)
from .verify import decay_fit, verify_fusion_ladder, verify_inversion

__version__ = "0.1.0"
