"""Field-state dissipative dynamics of the two-photon Jaynes-Cummings model with Stark shift."""

__version__ = "0.1.0"

from .errors import DispersiveError, ParameterError, StepSizeError, TruncationError  # noqa: E402
from .liouville import (  # noqa: E402
    amplitude_moment,
    branch_density,
    entropy_from_state,
    field_state,
    kernel,
    linear_entropy,
    superop_commutators_check,
)
from .model import (  # noqa: E402
    DimensionlessRatios,
    FieldDensityMatrix,
    ModelParams,
    RawCouplings,
    build_params,
    choose_truncation,
    coherent_vector,
    params_from_ratios,
)
from .oracle import IntegratorConfig, propagate, reduce_field, unitary_reference  # noqa: E402
from .spectrum import (  # noqa: E402
    block_hamiltonian,
    dispersive_eigenvalues,
    dispersive_report,
    effective_diagonal,
    exact_eigenvalues,
)
