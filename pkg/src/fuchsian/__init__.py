"""Uniformization of four-punctured spheres through modular forms.

Computes the Fuchsian value of the accessory parameter, parabolic generators
of the uniformizing group, q-expansions of the Hauptmodul and of the
weight-one form, Rankin-Cohen bracket identities, classical-parameter
conversions, and the local expansion of the accessory function around the
symmetric point.
"""

from .bignum import precision_context, to_mpc
from .convert import AccessoryData, closed_forms_four, four_puncture_data, rho_to_m, transport_rho
from .expansion import ExpandConfig, fit_coefficients, sample_line, verify_relations
from .frobenius import (
    FrobeniusArtifacts,
    ProblemSpec,
    Q_at,
    build_Q,
    build_T_and_F,
    build_artifacts,
    continue_solution,
    frobenius_coefficients,
    modular_series,
)
from .geometry import (
    GroupData,
    Moebius,
    build_generators,
    cusp_representatives,
    fixed_points,
    involution_lift,
    normalize_domain,
    scale_factor,
    stabilizer_constants,
)
from .modular import (
    QExpansion,
    RingBasis,
    rational_generators,
    rc_bracket,
    ring_basis,
    verify_bracket_identities,
    verify_uniformizing_identities,
)
from .series import PowerSeries, arith
from .solver import (
    SolverConfig,
    UniformizationResult,
    continuation_solve,
    residuals,
    result_from_json,
    result_to_json,
    solve_rho,
)

__version__ = "0.1.0"

__all__ = [
    "AccessoryData",
    "ExpandConfig",
    "FrobeniusArtifacts",
    "GroupData",
    "Moebius",
    "PowerSeries",
    "ProblemSpec",
    "QExpansion",
    "Q_at",
    "RingBasis",
    "SolverConfig",
    "UniformizationResult",
    "arith",
    "build_Q",
    "build_T_and_F",
    "build_artifacts",
    "build_generators",
    "closed_forms_four",
    "continuation_solve",
    "continue_solution",
    "cusp_representatives",
    "fit_coefficients",
    "fixed_points",
    "four_puncture_data",
    "frobenius_coefficients",
    "involution_lift",
    "modular_series",
    "normalize_domain",
    "precision_context",
    "rational_generators",
    "rc_bracket",
    "residuals",
    "result_from_json",
    "result_to_json",
    "rho_to_m",
    "ring_basis",
    "sample_line",
    "scale_factor",
    "solve_rho",
    "stabilizer_constants",
    "to_mpc",
    "transport_rho",
    "verify_bracket_identities",
    "verify_relations",
    "verify_uniformizing_identities",
]
