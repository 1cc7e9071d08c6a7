"""
Exhaustive (C, gamma) search with stratified k-fold cross-validation.

Folds come from sklearn's StratifiedKFold with a seeded shuffle, and the
score of a grid cell is the pooled accuracy over all held-out predictions.
The best cell is the highest score; ties go to the smallest C, then the
smallest gamma.
"""

from typing import Sequence, List, Optional, Tuple

import numpy as np
from sklearn.model_selection import StratifiedKFold

from ..core.exceptions import InsufficientSamples, DimensionMismatch
from ..utils.logger import get_logger
from ..utils.threading_utils import WorkerPool
from .kernel import squared_distances
from .model import SvmParams, GridSearchResult
from .multiclass import train_multiclass, predict_array
from .smo import as_sample_matrix

logger = get_logger(__name__)


def log2_grid(start: int, stop: int, step: int = 2) -> List[float]:
    """Powers of two 2^start .. 2^stop inclusive."""
    return [2.0 ** e for e in range(start, stop + 1, step)]


DEFAULT_C_GRID = log2_grid(-5, 15)
DEFAULT_GAMMA_GRID = log2_grid(-15, 3)


def stratified_folds(labels: Sequence[int], folds: int, seed: int) -> np.ndarray:
    """Held-out fold index per sample."""
    labels_arr = np.asarray(labels)
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    assignment = np.empty(len(labels_arr), dtype=np.int64)
    for fold, (_, held_out) in enumerate(splitter.split(np.zeros((len(labels_arr), 1)), labels_arr)):
        assignment[held_out] = fold
    return assignment


def _score_cell(
    matrix: np.ndarray,
    labels: np.ndarray,
    distances: np.ndarray,
    assignment: np.ndarray,
    folds: int,
    params: SvmParams,
) -> Tuple[float, List[float], bool]:
    kernel = np.exp(-params.gamma * distances)
    correct = 0
    fold_scores = []
    converged = True
    for fold in range(folds):
        test = assignment == fold
        train = ~test
        train_idx = np.flatnonzero(train)
        model = train_multiclass(
            matrix[train], labels[train], params,
            kernel=kernel[np.ix_(train_idx, train_idx)],
        )
        converged = converged and model.converged
        predicted = predict_array(model, matrix[test])
        hits = int(np.sum(predicted == labels[test]))
        correct += hits
        fold_scores.append(hits / int(test.sum()))
    return correct / len(labels), fold_scores, converged


def grid_search(
    samples: Sequence[Sequence[float]],
    labels: Sequence[int],
    c_grid: Optional[Sequence[float]] = None,
    gamma_grid: Optional[Sequence[float]] = None,
    folds: int = 5,
    seed: int = 1234,
    base: Optional[SvmParams] = None,
    jobs: int = 1,
) -> GridSearchResult:
    """
    Evaluate every (C, gamma) cell by stratified k-fold cross-validation.

    Args:
        samples: Training vectors
        labels: Integer class labels
        c_grid: C values (default 2^-5 .. 2^15, step 2^2)
        gamma_grid: gamma values (default 2^-15 .. 2^3, step 2^2)
        folds: Number of folds (>= 2)
        seed: Seed of the fold shuffle, recorded in the result
        base: Tolerance and pass limit for every trained machine
        jobs: Grid cells evaluated concurrently

    Raises:
        InsufficientSamples: folds < 2 or a class has fewer than folds samples
    """
    c_values = list(DEFAULT_C_GRID if c_grid is None else c_grid)
    gamma_values = list(DEFAULT_GAMMA_GRID if gamma_grid is None else gamma_grid)
    if not c_values or not gamma_values:
        raise ValueError("parameter grids must not be empty")
    base = base or SvmParams()

    matrix = as_sample_matrix(samples)
    labels_arr = np.asarray(labels, dtype=np.int64)
    if matrix.shape[0] != len(labels_arr):
        raise DimensionMismatch("samples and labels disagree in shape")
    if folds < 2:
        raise InsufficientSamples(f"cross-validation needs at least 2 folds, got {folds}")
    classes, counts = np.unique(labels_arr, return_counts=True)
    if len(classes) < 2:
        raise InsufficientSamples("cross-validation needs at least two classes")
    short = [(int(c), int(n)) for c, n in zip(classes, counts) if n < folds]
    if short:
        raise InsufficientSamples(f"{folds} folds need {folds} samples per class; short: {short}")

    assignment = stratified_folds(labels_arr, folds, seed)
    distances = squared_distances(matrix, matrix)
    cells = [
        SvmParams(c=c, gamma=g, tolerance=base.tolerance, max_passes=base.max_passes)
        for c in c_values for g in gamma_values
    ]

    pool = WorkerPool("grid-search", jobs)
    outcomes = pool.map(
        lambda params: _score_cell(matrix, labels_arr, distances, assignment, folds, params),
        cells,
    )
    for outcome in outcomes:
        if not outcome.ok:
            raise outcome.error

    search_log = []
    best_index = None
    best_key = None
    nonconverged = 0
    for k, (params, outcome) in enumerate(zip(cells, outcomes)):
        score, _, converged = outcome.value
        search_log.append((params.c, params.gamma, score))
        if not converged:
            nonconverged += 1
        key = (-score, params.c, params.gamma)
        if best_key is None or key < best_key:
            best_key, best_index = key, k

    best = cells[best_index]
    best_score, best_folds, _ = outcomes[best_index].value
    if nonconverged:
        logger.warning(f"{nonconverged} grid cells had non-converged machines")
    logger.info(
        f"Grid search: best C={best.c:g} gamma={best.gamma:g} "
        f"cv accuracy {best_score:.4f} over {len(cells)} cells"
    )
    return GridSearchResult(
        best_params=best,
        cv_accuracy=best_score,
        fold_scores=best_folds,
        search_log=search_log,
        folds=folds,
        seed=seed,
        nonconverged=nonconverged,
    )
