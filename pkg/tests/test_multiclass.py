"""
Test suite for one-vs-one multiclass training and prediction.
"""

import numpy as np
import pytest

from mbm_forensics.core.exceptions import (
    DimensionMismatch, LengthMismatch, ScalingMismatch, SingleClassInput,
)
from mbm_forensics.core.models import FeatureVector
from mbm_forensics.feature.scaler import fit_scaler
from mbm_forensics.svm.model import BinarySvm, SvmModel, SvmParams
from mbm_forensics.svm.multiclass import classify, predict, predict_array, train_multiclass
from mbm_forensics.svm.smo import train_binary

CENTRES = [(0.0, 0.0), (5.0, 0.0), (0.0, 5.0)]


def _three_clusters(rng, n=12):
    samples = np.vstack([rng.normal(c, 0.4, size=(n, 2)) for c in CENTRES])
    labels = np.repeat([0, 1, 2], n)
    return samples, labels


def test_two_classes_match_binary_training():
    """A two-label problem trains the same machine as the binary solver."""
    rng = np.random.default_rng(30)
    samples = np.vstack([rng.normal(-1.0, 0.8, size=(10, 2)), rng.normal(1.0, 0.8, size=(10, 2))])
    labels = np.array([0] * 10 + [1] * 10)
    params = SvmParams(c=2.0, gamma=0.5)

    multi = train_multiclass(samples, labels, params)
    binary = train_binary(samples, np.where(labels == 1, 1, -1), params)

    probe = rng.normal(size=(15, 2))
    assert multi.classes == (0, 1)
    assert len(multi.machines) == 1
    assert np.allclose(multi.machines[0].decision(probe), binary.machines[0].decision(probe))


def test_three_clusters():
    """Three machines, perfect separation of well-spaced clusters."""
    rng = np.random.default_rng(31)
    samples, labels = _three_clusters(rng)
    model = train_multiclass(samples, labels, SvmParams(c=4.0, gamma=0.5))

    assert model.classes == (0, 1, 2)
    assert [(m.neg_label, m.pos_label) for m in model.machines] == [(0, 1), (0, 2), (1, 2)]
    assert list(predict_array(model, samples)) == list(labels)
    assert predict(model, [4.8, 0.3]) == 1
    assert predict(model, [0.2, 5.1]) == 2


def test_vote_tie_goes_to_largest_margin():
    """A three-way vote tie is broken by summed signed margins."""
    def constant(neg, pos, bias):
        return BinarySvm(neg, pos, np.zeros((0, 2)), np.zeros(0), bias, gamma=1.0)

    model = SvmModel(
        params=SvmParams(),
        classes=(0, 1, 2),
        machines=[constant(0, 1, 0.5), constant(0, 2, -0.2), constant(1, 2, 0.1)],
        dimension=2,
    )
    assert predict(model, [0.0, 0.0]) == 1


def test_scaled_model_input_checks():
    """Scaled models take scaled vectors; classify scales raw ones itself."""
    rng = np.random.default_rng(32)
    samples, labels = _three_clusters(rng)
    raw = [FeatureVector(tuple(float(x) for x in row)) for row in samples * 40.0]
    scaler = fit_scaler(raw)
    scaled = np.array([scaler.apply(v).values for v in raw])
    model = train_multiclass(scaled, labels, SvmParams(c=4.0, gamma=0.5), scaler=scaler)

    with pytest.raises(ScalingMismatch):
        predict(model, raw[0])
    assert predict(model, scaler.apply(raw[0])) == 0

    label, decisions = classify(model, raw[-1])
    assert label == 2
    assert len(decisions) == 3


def test_unscaled_model_rejects_scaled_vector():
    """The scaling state of a FeatureVector must match the model."""
    rng = np.random.default_rng(33)
    samples, labels = _three_clusters(rng, n=5)
    model = train_multiclass(samples, labels, SvmParams())
    with pytest.raises(ScalingMismatch):
        predict(model, FeatureVector((0.0, 0.0), scaled=True))


def test_input_errors():
    """Single class, ragged samples and wrong lengths."""
    with pytest.raises(SingleClassInput):
        train_multiclass([[0.0], [1.0]], [2, 2], SvmParams())
    with pytest.raises(DimensionMismatch):
        train_multiclass([[0.0], [1.0]], [0, 1, 1], SvmParams())

    model = train_multiclass([[0.0, 0.0], [3.0, 3.0]], [0, 1], SvmParams())
    with pytest.raises(DimensionMismatch):
        predict(model, [1.0, 2.0, 3.0])
    with pytest.raises(LengthMismatch):
        classify(model, FeatureVector((1.0,)))
