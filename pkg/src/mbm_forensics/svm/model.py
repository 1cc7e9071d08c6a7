"""
SVM data types.

A model is a set of pairwise binary machines over sorted class labels; a
binary problem is the one-machine case.
"""

from dataclasses import dataclass, field
from typing import Tuple, List, Optional

import numpy as np

from ..feature.scaler import FeatureScaler
from .kernel import rbf_kernel_matrix

# Dual coefficients at or below this magnitude are not support vectors
ALPHA_EPSILON = 1e-7


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    gamma: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 1000             # iteration limit = max_passes * samples

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"C must be > 0, got {self.c}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be >= 1, got {self.max_passes}")


@dataclass
class BinarySvm:
    """One soft-margin machine; decision > 0 votes for pos_label."""
    neg_label: int
    pos_label: int
    support_vectors: np.ndarray        # (k, d)
    dual_coefs: np.ndarray             # (k,) signed alpha_i * y_i
    bias: float
    gamma: float
    converged: bool = True
    iterations: int = 0

    @property
    def dimension(self) -> int:
        return int(self.support_vectors.shape[1]) if self.support_vectors.size else 0

    def decision(self, x: np.ndarray) -> np.ndarray:
        """Decision values for rows of x."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if len(self.dual_coefs) == 0:
            return np.full(x.shape[0], self.bias)
        kernel = rbf_kernel_matrix(x, self.support_vectors, self.gamma)
        return kernel @ self.dual_coefs + self.bias


@dataclass
class SvmModel:
    params: SvmParams
    classes: Tuple[int, ...]
    machines: List[BinarySvm]
    dimension: int
    scaler: Optional[FeatureScaler] = None
    notes: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines)

    @property
    def is_binary(self) -> bool:
        return len(self.classes) == 2

    @property
    def support_vector_count(self) -> int:
        return sum(len(m.dual_coefs) for m in self.machines)

    def machine(self, neg_label: int, pos_label: int) -> BinarySvm:
        for m in self.machines:
            if (m.neg_label, m.pos_label) == (neg_label, pos_label):
                return m
        raise KeyError((neg_label, pos_label))


@dataclass
class GridSearchResult:
    best_params: SvmParams
    cv_accuracy: float
    fold_scores: List[float]
    search_log: List[Tuple[float, float, float]]    # (C, gamma, pooled accuracy)
    folds: int
    seed: int
    nonconverged: int = 0              # grid cells with a non-converged fold
