"""Exact-evolution laboratory for small open bipartite quantum systems."""

from .dynamics import (
    DensityMatrix,
    TwoLevelSpectrum,
    rho_full,
    rho_full_index_sum,
    rho_reduced,
    sweep,
    two_level_spectrum,
    uniform_grid,
)
from .divisibility import (
    DivisibilityReport,
    SuperMatrix,
    divisibility_residual,
    memory_terms,
    supermatrix,
)
from .entropy import (
    BoundReport,
    EntropyTrace,
    RateEstimate,
    constant_entropy_check,
    entanglement_rate_at_zero,
    entropy_trace,
    kitaev_bound_report,
    von_neumann_entropy,
)
from .linalg import (
    NumericalCheckError,
    hermitian_eig,
    kron,
    matexp_hermitian_generator,
    operator_norm,
    partial_trace_env,
    partial_trace_sys,
)
from .model import (
    BipartiteSystem,
    CommutatorClassification,
    InitialState,
    commutator_classification,
    total_hamiltonian,
)
from .spinboson import (
    ClosedFormEntropy,
    ClosedFormValues,
    CrossCheckReport,
    SpinBosonParams,
    build_model,
    closed_form_entropy,
    closed_form_functions,
    closed_form_rate,
    cross_check,
    e_polynomial,
    e_polynomial_conj,
    gamma_coupling,
    omega_env,
)
from .zassenhaus import (
    OrderScanResult,
    c_terms,
    truncated_exponential,
    truncation_order_scan,
    zassenhaus_terms,
)

__version__ = "0.1.0"
