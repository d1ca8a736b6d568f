"""Luxemburg norms for Zygmund-type Young functions and operator norms of
random subsystems of bounded orthogonal systems."""
from __future__ import annotations

from ._backend import NAME as BACKEND
from .luxemburg import (
    NormResult,
    NumericalFailure,
    luxemburg_gradient,
    luxemburg_norm,
    luxemburg_norms,
    modular,
)
from .opnorm import OpNormEstimate, l2_top_singular, opnorm_ascent, opnorm_bruteforce
from .sampling import IndexSet, bernoulli_subset, delta_main, delta_power
from .space import ProbSpace, expectation, inner_product, lp_norm, uniform_grid_space
from .systems import DenseSystem, FourierSystem, WalshSystem, fourier_system, validate_system, walsh_system
from .young import (
    YoungSpec,
    parse_family,
    young_close2,
    young_eval,
    young_kashin,
    young_power,
    young_ryou,
    young_validate,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DenseSystem",
    "FourierSystem",
    "IndexSet",
    "NormResult",
    "NumericalFailure",
    "OpNormEstimate",
    "ProbSpace",
    "WalshSystem",
    "YoungSpec",
    "bernoulli_subset",
    "delta_main",
    "delta_power",
    "expectation",
    "fourier_system",
    "inner_product",
    "l2_top_singular",
    "lp_norm",
    "luxemburg_gradient",
    "luxemburg_norm",
    "luxemburg_norms",
    "modular",
    "opnorm_ascent",
    "opnorm_bruteforce",
    "parse_family",
    "uniform_grid_space",
    "validate_system",
    "walsh_system",
    "young_close2",
    "young_eval",
    "young_kashin",
    "young_power",
    "young_ryou",
    "young_validate",
]
