"""
One-vs-one multiclass wrapper and prediction.

For every label pair a < b a machine is trained with a -> -1 and b -> +1.
Prediction is a majority vote; ties go to the largest summed signed margin,
then to the smaller label.
"""

from itertools import combinations
from typing import Sequence, Optional, Union, List, Tuple

import numpy as np

from ..core.exceptions import SingleClassInput, DimensionMismatch, ScalingMismatch, LengthMismatch
from ..core.models import FeatureVector
from ..feature.scaler import FeatureScaler
from ..utils.logger import get_logger
from .kernel import rbf_kernel_matrix
from .model import SvmParams, SvmModel
from .smo import as_sample_matrix, train_machine

logger = get_logger(__name__)


def train_multiclass(
    samples: Sequence[Sequence[float]],
    labels: Sequence[int],
    params: SvmParams,
    kernel: Optional[np.ndarray] = None,
    scaler: Optional[FeatureScaler] = None,
) -> SvmModel:
    """
    Train one machine per label pair.

    Args:
        samples: Training vectors (already scaled when scaler is given)
        labels: Integer class labels
        params: SVM parameters shared by every machine
        kernel: Optional precomputed kernel matrix over samples
        scaler: Scaler the samples went through, bound into the model

    Raises:
        SingleClassInput: Fewer than two distinct labels
        DimensionMismatch: Samples/labels disagree in count or dimension
    """
    matrix = as_sample_matrix(samples)
    labels_arr = np.asarray(labels, dtype=np.int64)
    if len(labels_arr) != matrix.shape[0]:
        raise DimensionMismatch(f"{matrix.shape[0]} samples but {len(labels_arr)} labels")

    classes = tuple(int(c) for c in np.unique(labels_arr))
    if len(classes) < 2:
        raise SingleClassInput(f"training set holds only class {classes[0] if classes else None}")

    if kernel is None:
        kernel = rbf_kernel_matrix(matrix, matrix, params.gamma)

    machines = []
    for neg, pos in combinations(classes, 2):
        idx = np.where((labels_arr == neg) | (labels_arr == pos))[0]
        signs = np.where(labels_arr[idx] == pos, 1.0, -1.0)
        machines.append(train_machine(
            matrix[idx], signs, params,
            neg_label=neg, pos_label=pos,
            kernel=kernel[np.ix_(idx, idx)],
        ))

    model = SvmModel(
        params=params,
        classes=classes,
        machines=machines,
        dimension=matrix.shape[1],
        scaler=scaler,
    )
    if not model.converged:
        model.notes.append("non-converged machine")
    logger.debug(
        f"Trained {len(machines)} machines over classes {classes}, "
        f"{model.support_vector_count} support vectors"
    )
    return model


def decision_matrix(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Decision values, shape (samples, machines)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.dimension:
        raise DimensionMismatch(f"vectors of length {x.shape[1]}, model expects {model.dimension}")
    return np.column_stack([m.decision(x) for m in model.machines])


def predict_array(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Predict labels for rows of x (already in the model's input space)."""
    decisions = decision_matrix(model, x)
    index = {label: k for k, label in enumerate(model.classes)}
    out = np.empty(decisions.shape[0], dtype=np.int64)

    for row, values in enumerate(decisions):
        votes = np.zeros(len(model.classes), dtype=np.int64)
        margins = np.zeros(len(model.classes))
        for machine, d in zip(model.machines, values):
            winner = machine.pos_label if d > 0 else machine.neg_label
            votes[index[winner]] += 1
            margins[index[machine.pos_label]] += d
            margins[index[machine.neg_label]] -= d
        # classes are sorted, so the first maximum is the smaller label
        top = np.flatnonzero(votes == votes.max())
        best = top[int(np.argmax(margins[top]))] if len(top) > 1 else top[0]
        out[row] = model.classes[best]
    return out


def predict(model: SvmModel, x: Union[FeatureVector, Sequence[float]]) -> int:
    """
    Predict one label.

    A FeatureVector must match the model's scaling state: scaled input for a
    model trained with a scaler, raw input otherwise.

    Raises:
        DimensionMismatch: Wrong vector length
        ScalingMismatch: Scaled/unscaled input against the other kind of model
    """
    if isinstance(x, FeatureVector):
        if x.scaled != (model.scaler is not None):
            expected = "scaled" if model.scaler is not None else "unscaled"
            raise ScalingMismatch(f"model expects {expected} features")
        values = x.values
    else:
        values = x
    return int(predict_array(model, np.asarray([values], dtype=np.float64))[0])


def classify(model: SvmModel, v: FeatureVector) -> Tuple[int, List[float]]:
    """Scale a raw vector with the model's own scaler when it has one, then predict."""
    if v.n != model.dimension:
        raise LengthMismatch(f"feature vector of length {v.n}, model expects {model.dimension}")
    if model.scaler is not None and not v.scaled:
        v = model.scaler.apply(v)
    decisions = decision_matrix(model, np.asarray([v.values]))[0]
    return predict(model, v), [float(d) for d in decisions]
