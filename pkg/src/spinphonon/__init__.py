"""Spin-phonon quantum embedding for single-molecule magnets.

SVD projection of the spin-phonon coupling into primary collective modes,
golden-rule relaxation rates against the residual bath, Lindblad propagation
of the spin + primary-mode density matrix, and entanglement analysis.
"""

from .constants import CM1_TO_RAD_PER_PS, K_B, MU_B, PhysicalConstants
from .core import (
    DensityMatrix,
    HilbertLayout,
    QOperator,
    annihilation,
    basis_state,
    bose_occupation,
    creation,
    embed,
    mutual_information,
    number_op,
    partial_trace,
    pauli,
    thermal_state,
    von_neumann_entropy,
)
from .dynamics import (
    LindbladModel,
    SpinParameters,
    Trajectory,
    build_collapse_ops,
    build_hamiltonian,
    build_model,
    lindblad_rhs,
    propagate,
)
from .projection import (
    ProjectionResult,
    RawVibrationalModel,
    project,
    scale_to_field,
    svd_coupling,
)
from .rates import (
    RateRequest,
    RateResult,
    compute_rates,
    correlation_function,
    rate_temperature_scan,
    relaxation_rate,
)
from .analysis import (
    ObservableSeries,
    delta_rho_initial,
    detrend_thermal,
    dominant_period,
    mutual_info_series,
    population_series,
)

__version__ = "0.1.0"
