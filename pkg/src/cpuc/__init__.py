"""Capacity per unit cost, Holevo quantities and Fisher-information bounds.

Finite-dimensional channels are given by Kraus operators; one-mode
Gaussian channels are handled in phase space with a truncated Fock-space
oracle (:mod:`cpuc.fock`) as an independent check.  All information
quantities are in nats.
"""

from .capacity import (
    CapacityCostPoint,
    ChiDecomposition,
    CpucResult,
    Ensemble,
    binary_encoding_chi,
    capacity_cost,
    capacity_per_unit_cost,
    chi_reference_decomposition,
    holevo_chi_entropy_form,
    holevo_chi_relent_form,
    mutual_information,
)
from .channels import (
    CostFunction,
    KrausChannel,
    ParamStateFamily,
    amplitude_damping,
    apply,
    bloch_family,
    cost_of,
    depolarizing_channel,
    generalized_amplitude_damping,
    identity_channel,
    mixture_family,
    polynomial_qubit_family,
    random_channel,
    random_qubit_family,
    random_state,
    rotation_family,
    validate_kraus,
)
from .core import (
    DensityMatrix,
    DomainError,
    NumericalError,
    PreconditionError,
    ValidationError,
    kernel_weight,
    relative_entropy,
    spectral_decompose,
    support_contained,
    von_neumann_entropy,
)
from .fisher import (
    BoundsReport,
    estimation_bounds_report,
    first_order_consistent,
    qfi,
    reqfi,
    second_order_errors,
)
from .gaussian import (
    FiducialChannel,
    GaussianParams,
    GaussianState,
    OutputParams,
    apply_fiducial,
    classify,
    coherent_capacity,
    cpuc_gaussian,
    cpuc_gaussian_numeric,
    from_params,
    g_function,
    gaussian_relative_entropy,
    output_params,
    pie_curve,
    relent_vs_vacuum_output,
    symplectic_eigenvalue,
    thermal_entropy,
    thermal_entropy_increment,
    vacuum_output_params,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
