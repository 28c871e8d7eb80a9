"""Two qubits in a commuting many-body environment: exact reduced dynamics
versus GKSL dephasing models."""

__version__ = "0.1.0"

from .errors import IntegrityError, ResourceError, UsageError
from .qcore import (
    PLUS_PLUS,
    hermitian_eigensystem,
    pauli_decompose,
    pauli_reconstruct,
    reduce_couplings,
    validate_density_matrix,
)
from .micro import (
    GravitationalSpec,
    MicroModel,
    brute_force_reduced_state,
    env_moments,
    gravitational_model,
    isolated_state,
    random_micro_model,
    reduced_state,
)
from .lindblad import (
    DissipatorMatrix,
    LambdaSchedule,
    LindbladModel,
    dephasing_closed_form,
    dephasing_model,
    dephasing_time_dependent,
    evolve,
    evolve_trajectory,
    lindblad_concurrence_rate,
)
from .observables import (
    PowerLawFit,
    ThresholdResult,
    concurrence,
    concurrence_growth_rate,
    fidelity,
    fit_power_law,
    purity,
    threshold_scan,
)
