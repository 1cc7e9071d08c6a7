"""Macroblock-mode stability features and their scaling."""

from .mbm import mbm_equal, indicator, compute_vi, compute_feature_vector, decay_curve
from .scaler import FeatureScaler, fit_scaler, apply_scaler

__all__ = [
    "mbm_equal",
    "indicator",
    "compute_vi",
    "compute_feature_vector",
    "decay_curve",
    "FeatureScaler",
    "fit_scaler",
    "apply_scaler",
]
