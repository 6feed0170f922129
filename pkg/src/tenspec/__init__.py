"""Characteristic polynomials of random antisymmetric tensors via Grassmann integrals.

Exact small-N evaluation, the averaged polynomial and its roots at large N,
the Fuss-Catalan root-density law, saddle-point analysis and Monte Carlo
validation.
"""
__version__ = "0.1.0"

from .algebra import CRational, LambdaPoly, exact  # noqa: E402
from .closed import (  # noqa: E402
    AvgCharPoly,
    InteractionPreset,
    avg_coeffs,
    hermite_consistency,
    hermite_reference,
    mu_from_preset,
    mu_from_tilde,
    mu_tilde,
)
from .ensemble import (  # noqa: E402
    EnsembleSpec,
    MatrixSpec,
    RunningMoments,
    mc_average_charpoly,
    sample_symmetric_matrix,
    sample_tensor,
    zscore_report,
)
from .fuss_catalan import (  # noqa: E402
    FCDensity,
    FCParams,
    density_P,
    fc_branch_solve,
    fc_number,
    hypergeometric_series,
    moments_check,
    rho_gurau,
    rho_radial,
)
from .grassmann import (  # noqa: E402
    GrassmannPoly,
    MonomialKey,
    berezin_top,
    char_poly_matrix,
    exp_nilpotent,
    hyperpfaffian,
    mul,
    pfaffian,
)
from .roots import (  # noqa: E402
    RootSet,
    ScaledPoly,
    find_roots,
    lift_roots,
    power_sums,
    reduce_by_symmetry,
    verify_generating_identity,
)
from .saddle import (  # noqa: E402
    ActionQ,
    contributing_saddles,
    find_saddles,
    flow,
    omega_saddle,
    predict_zero_radii,
    rho_from_saddle,
)
from .tensors import AntisymTensor, CouplingSet, all_g_unit_vanishes, char_poly_exact  # noqa: E402

__all__ = [
    "ActionQ",
    "AntisymTensor",
    "AvgCharPoly",
    "CRational",
    "CouplingSet",
    "EnsembleSpec",
    "FCDensity",
    "FCParams",
    "GrassmannPoly",
    "InteractionPreset",
    "LambdaPoly",
    "MatrixSpec",
    "MonomialKey",
    "RootSet",
    "RunningMoments",
    "ScaledPoly",
    "all_g_unit_vanishes",
    "avg_coeffs",
    "berezin_top",
    "char_poly_exact",
    "char_poly_matrix",
    "contributing_saddles",
    "density_P",
    "exact",
    "exp_nilpotent",
    "fc_branch_solve",
    "fc_number",
    "find_roots",
    "find_saddles",
    "flow",
    "hermite_consistency",
    "hermite_reference",
    "hypergeometric_series",
    "hyperpfaffian",
    "lift_roots",
    "mc_average_charpoly",
    "moments_check",
    "mu_from_preset",
    "mu_from_tilde",
    "mu_tilde",
    "mul",
    "omega_saddle",
    "pfaffian",
    "power_sums",
    "predict_zero_radii",
    "reduce_by_symmetry",
    "rho_from_saddle",
    "rho_gurau",
    "rho_radial",
    "sample_symmetric_matrix",
    "sample_tensor",
    "verify_generating_identity",
    "zscore_report",
]
