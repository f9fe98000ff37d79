"""Simulation and certification toolkit for steering on linear quantum
networks with trusted endpoints and independent sources."""

from .operators import (
    QOperator,
    hermitian_eigenvalues,
    identity,
    is_density,
    is_psd,
    max_entry_distance,
    negativity,
    op_equal,
    partial_trace,
    partial_transpose,
    tensor,
)
from .states import (
    Channel,
    DEWParams,
    apply_channel,
    classical_correlated,
    dew,
    erasure_channel,
    psi_minus,
    werner,
)
from .measurements import (
    POVM,
    SeparableMeasurement,
    bell_swap_povm,
    computational_basis_povm,
    induced_measurement,
    input_encoded_measurement,
    pauli_projective,
)
from .network import (
    LinearNetwork,
    NetworkAssemblage,
    assemblage_element,
    bilocal_assemblage,
    condition_on_trusted_measurement,
    lift_inputless_to_conditional,
    line_assemblage,
    standard_assemblage,
    untrusted_input_to_outcome,
)
from .certificates import (
    BlochData,
    Verdict,
    bloch_data,
    certify_network_steering,
    claims_pipeline,
    dew_unsteerable_both_ways,
    erased_unsteerable,
    linear_steering_witness,
)
from .nlhs import (
    NLHSModel,
    SeparableDecomposition,
    SourceSlot,
    build_percolation_line,
    build_sep_unsteer_bilocal,
    build_triangle_patterns,
    nlhs_to_separable_realization,
    reconstruct,
    separabilize_endpoint,
)

__version__ = "0.1.0"
