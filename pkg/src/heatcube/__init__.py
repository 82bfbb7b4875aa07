"""Exact and Monte Carlo tools for biased heat flow on the Hamming cube."""

from .cube import (BiasVector, CubeFunction, CubePoint, NormSpec, ProductMeasure, WeightVector,
                   lp_norm, orlicz_norm, weak_lp_norm)
from .fourier import FourierTable, inverse_walsh, multilinear_eval, walsh_transform
from .heatflow import kernel_matrix, semigroup_apply, theta_star, verify_identity
from .topology import find_antipodal_zero, restricted_poincare_check

__all__ = [
    "BiasVector", "CubeFunction", "CubePoint", "NormSpec", "ProductMeasure", "WeightVector",
    "lp_norm", "orlicz_norm", "weak_lp_norm",
    "FourierTable", "inverse_walsh", "multilinear_eval", "walsh_transform",
    "kernel_matrix", "semigroup_apply", "theta_star", "verify_identity",
    "find_antipodal_zero", "restricted_poincare_check",
]
