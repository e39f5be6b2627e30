"""Coverage, association and area spectral efficiency of a UAV-assisted
downlink with Thomas-clustered users, plus a Monte Carlo oracle."""

from .association import AssociationProfile, assoc_prob_0, assoc_prob_1, assoc_prob_2, assoc_profile
from .coverage import (
    CoverageReport,
    ExclusionRule,
    ase,
    exclusion_rule,
    laplace_i0,
    laplace_i1,
    laplace_i2,
    total_coverage,
    total_coverage_multiheight,
)
from .model import (
    LinkState,
    MultiHeightParams,
    SystemParams,
    TierKind,
    TierRef,
    ValidationError,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    validate,
    validate_multiheight,
    watts_to_dbm,
)
from .quadrature import QuadratureError, Tolerance
from .simulator import SimConfig, SimEstimate, estimate_ase, estimate_coverage, sample_realization, simulate

__all__ = [
    "AssociationProfile", "CoverageReport", "ExclusionRule", "LinkState", "MultiHeightParams",
    "QuadratureError", "SimConfig", "SimEstimate", "SystemParams", "TierKind", "TierRef",
    "Tolerance", "ValidationError", "ase", "assoc_prob_0", "assoc_prob_1", "assoc_prob_2",
    "assoc_profile", "db_to_linear", "dbm_to_watts", "estimate_ase", "estimate_coverage",
    "exclusion_rule", "laplace_i0", "laplace_i1", "laplace_i2", "linear_to_db",
    "sample_realization", "simulate", "total_coverage", "total_coverage_multiheight",
    "validate", "validate_multiheight", "watts_to_dbm",
]

__version__ = "0.1.0"
