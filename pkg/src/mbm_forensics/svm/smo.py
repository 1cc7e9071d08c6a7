"""
Sequential minimal optimization for the soft-margin SVM dual.

Works on beta_t = y_t * alpha_t, boxed by A_t <= beta_t <= B_t with
(A, B) = (0, C) for y = +1 and (-C, 0) for y = -1, and sum(beta) = 0.
g_t = y_t - (K beta)_t is the gradient of the dual objective. Each step
takes the maximal violating pair

    i = argmax g over {beta < B},   j = argmin g over {beta > A}

and moves beta_i up, beta_j down by the clipped Newton step. Training stops
once g_i - g_j < tolerance.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, List, Optional

import numpy as np

from ..core.exceptions import SingleClassInput, DimensionMismatch
from ..utils.logger import get_logger
from .kernel import rbf_kernel_matrix
from .model import SvmParams, SvmModel, BinarySvm, ALPHA_EPSILON

logger = get_logger(__name__)

_MIN_CURVATURE = 1e-12


@dataclass
class DualSolution:
    beta: np.ndarray                   # signed alpha
    bias: float
    iterations: int
    converged: bool


def solve_dual(kernel: np.ndarray, y: np.ndarray, c: float, tolerance: float, max_iter: int) -> DualSolution:
    """Solve the dual for a precomputed kernel matrix and labels in {-1, +1}."""
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    lower = np.where(y > 0, 0.0, -c)
    upper = np.where(y > 0, c, 0.0)
    beta = np.zeros(n)
    grad = y.copy()

    iterations = 0
    converged = False
    while True:
        can_rise = beta < upper
        can_fall = beta > lower
        if not can_rise.any() or not can_fall.any():
            converged = True
            break
        i = int(np.argmax(np.where(can_rise, grad, -np.inf)))
        j = int(np.argmin(np.where(can_fall, grad, np.inf)))
        gap = grad[i] - grad[j]
        if gap < tolerance:
            converged = True
            break
        if iterations >= max_iter:
            break

        curvature = max(kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j], _MIN_CURVATURE)
        room_i = upper[i] - beta[i]
        room_j = beta[j] - lower[j]
        step = min(room_i, room_j, gap / curvature)

        beta[i] = upper[i] if step == room_i else beta[i] + step
        beta[j] = lower[j] if step == room_j else beta[j] - step
        grad -= step * (kernel[i] - kernel[j])
        iterations += 1

    free = (beta > lower) & (beta < upper)
    if free.any():
        bias = float(grad[free].mean())
    else:
        rise = beta < upper
        fall = beta > lower
        top = grad[rise].max() if rise.any() else grad.min()
        bottom = grad[fall].min() if fall.any() else grad.max()
        bias = float((top + bottom) / 2.0)

    return DualSolution(beta=beta, bias=bias, iterations=iterations, converged=converged)


def dual_objective(alpha: np.ndarray, labels: np.ndarray, kernel: np.ndarray) -> float:
    """sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = alpha * np.asarray(labels, dtype=np.float64)
    return float(alpha.sum() - 0.5 * beta @ kernel @ beta)


def as_sample_matrix(samples) -> np.ndarray:
    """Samples as a (count, dimension) float array."""
    try:
        matrix = np.asarray(samples, dtype=np.float64)
    except ValueError:
        raise DimensionMismatch("samples must all have the same dimension") from None
    if matrix.ndim != 2:
        raise DimensionMismatch("samples must all have the same dimension")
    return matrix


def train_machine(
    samples: np.ndarray,
    signs: np.ndarray,
    params: SvmParams,
    neg_label: int = -1,
    pos_label: int = 1,
    kernel: Optional[np.ndarray] = None,
) -> BinarySvm:
    """Train one machine on labels in {-1, +1}; kernel may be precomputed."""
    samples = as_sample_matrix(samples)
    signs = np.asarray(signs, dtype=np.float64)
    if kernel is None:
        kernel = rbf_kernel_matrix(samples, samples, params.gamma)

    max_iter = params.max_passes * max(len(signs), 1)
    solution = solve_dual(kernel, signs, params.c, params.tolerance, max_iter)
    if not solution.converged:
        logger.warning(
            f"SMO stopped after {solution.iterations} iterations without converging "
            f"(C={params.c:g}, gamma={params.gamma:g}, classes {neg_label}/{pos_label})"
        )

    support = np.abs(solution.beta) > ALPHA_EPSILON
    return BinarySvm(
        neg_label=neg_label,
        pos_label=pos_label,
        support_vectors=samples[support].copy(),
        dual_coefs=solution.beta[support].copy(),
        bias=solution.bias,
        gamma=params.gamma,
        converged=solution.converged,
        iterations=solution.iterations,
    )


def train_binary(samples: Sequence[Sequence[float]], labels: Sequence[int], params: SvmParams) -> SvmModel:
    """
    Train on labels in {-1, +1}.

    Raises:
        SingleClassInput: Only one label present
        DimensionMismatch: Samples of differing dimension
    """
    matrix = as_sample_matrix(samples)
    signs = np.asarray(labels)
    if len(signs) != matrix.shape[0]:
        raise DimensionMismatch(f"{matrix.shape[0]} samples but {len(signs)} labels")
    present = set(int(v) for v in signs)
    if not present <= {-1, 1}:
        raise ValueError(f"binary labels must be -1 or +1, got {sorted(present)}")
    if len(present) < 2:
        raise SingleClassInput(f"training set holds only label {present.pop() if present else None}")

    machine = train_machine(matrix, signs, params)
    model = SvmModel(params=params, classes=(-1, 1), machines=[machine], dimension=matrix.shape[1])
    if logger.isEnabledFor(logging.DEBUG):
        violations = audit_kkt(model, matrix, signs)
        logger.debug(f"KKT audit: {len(violations)} violations, {len(machine.dual_coefs)} support vectors")
    return model


@dataclass
class KktViolation:
    index: int
    alpha: float
    margin: float                      # y * decision
    condition: str


def audit_kkt(model: SvmModel, samples, labels, tolerance: Optional[float] = None) -> List[KktViolation]:
    """Check KKT conditions of a binary model on its training set."""
    if not model.is_binary:
        raise ValueError("KKT audit needs a binary model")
    tol = model.params.tolerance if tolerance is None else tolerance
    machine = model.machines[0]
    matrix = as_sample_matrix(samples)
    signs = np.where(np.asarray(labels) == machine.pos_label, 1.0, -1.0)

    # recover alpha for every training point from the stored support vectors
    alpha = np.zeros(len(signs))
    for coef, sv in zip(machine.dual_coefs, machine.support_vectors):
        matches = np.where(np.all(matrix == sv, axis=1))[0]
        for idx in matches:
            if alpha[idx] == 0.0:
                alpha[idx] = abs(coef)
                break

    margins = signs * machine.decision(matrix)
    c = model.params.c
    violations = []
    for t, (a, m) in enumerate(zip(alpha, margins)):
        if a <= ALPHA_EPSILON:
            if m < 1.0 - tol:
                violations.append(KktViolation(t, a, float(m), "alpha=0 needs margin >= 1"))
        elif a >= c - ALPHA_EPSILON:
            if m > 1.0 + tol:
                violations.append(KktViolation(t, a, float(m), "alpha=C needs margin <= 1"))
        elif abs(m - 1.0) > tol:
            violations.append(KktViolation(t, a, float(m), "free alpha needs margin = 1"))
    return violations
