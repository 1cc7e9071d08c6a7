"""RBF kernel: exp(-gamma * ||x - y||^2)."""

from typing import Sequence

import numpy as np

from ..core.exceptions import LengthMismatch


def rbf_kernel(x: Sequence[float], y: Sequence[float], gamma: float) -> float:
    if len(x) != len(y):
        raise LengthMismatch(f"vectors of length {len(x)} and {len(y)}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    diff = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return float(np.exp(-gamma * np.dot(diff, diff)))


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise ||a_i - b_j||^2, clipped at 0 against cancellation."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise LengthMismatch(f"vectors of length {a.shape[1]} and {b.shape[1]}")
    diff = a[:, None, :] - b[None, :, :]
    return np.maximum(np.einsum("ijk,ijk->ij", diff, diff), 0.0)


def rbf_kernel_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return np.exp(-gamma * squared_distances(a, b))
