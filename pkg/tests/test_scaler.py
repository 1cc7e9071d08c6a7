"""
Test suite for feature scaling.
"""

import numpy as np
import pytest
from sklearn.preprocessing import MinMaxScaler, StandardScaler

from mbm_forensics.core.exceptions import EmptyTrainingSet, LengthMismatch, ScalingMismatch
from mbm_forensics.core.models import FeatureVector
from mbm_forensics.feature.scaler import FeatureScaler, apply_scaler, fit_scaler


def _vectors(rows, label=None):
    return [FeatureVector(tuple(float(x) for x in row), label=label) for row in rows]


def test_standard_scaling_centres_training_set():
    """Scaled training vectors have zero mean and unit variance."""
    rng = np.random.default_rng(3)
    training = _vectors(rng.normal(50.0, 12.0, size=(40, 3)))

    scaler = fit_scaler(training)
    scaled = np.array([scaler.apply(v).values for v in training])

    assert np.allclose(scaled.mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(scaled.std(axis=0), 1.0, atol=1e-9)


def test_constant_dimension_maps_to_zero():
    """A dimension without spread scales to 0 for both methods."""
    training = _vectors([[5.0, 1.0], [5.0, 3.0], [5.0, 2.0]])
    for method in ("standard", "minmax"):
        scaler = fit_scaler(training, method)
        assert scaler.apply(training[0]).values[0] == pytest.approx(0.0)


def test_minmax_maps_onto_unit_interval():
    """minmax sends the training range onto [-1, 1]."""
    training = _vectors([[0.0, 10.0], [4.0, 30.0], [2.0, 20.0]])
    scaler = fit_scaler(training, "minmax")

    assert scaler.apply(training[0]).values == pytest.approx((-1.0, -1.0))
    assert scaler.apply(training[1]).values == pytest.approx((1.0, 1.0))
    assert scaler.apply(training[2]).values == pytest.approx((0.0, 0.0))


def test_scaling_preserves_rank_per_dimension():
    """Scaling is monotone in every dimension."""
    rng = np.random.default_rng(4)
    training = _vectors(rng.uniform(0, 100, size=(25, 2)))
    for method in ("standard", "minmax"):
        scaler = fit_scaler(training, method)
        raw = np.array([v.values for v in training])
        scaled = np.array([scaler.apply(v).values for v in training])
        for d in range(2):
            assert list(np.argsort(raw[:, d])) == list(np.argsort(scaled[:, d]))


def test_invert_restores_raw_values():
    """invert(apply(v)) == v, label and source kept."""
    training = _vectors([[1.0, 7.0], [3.0, 9.0], [8.0, 2.0]])
    vector = FeatureVector((4.0, 5.0), label=1, source="clip.mp4")
    for method in ("standard", "minmax"):
        scaler = fit_scaler(training, method)
        scaled = apply_scaler(scaler, vector)
        assert scaled.scaled and scaled.label == 1 and scaled.source == "clip.mp4"
        restored = scaler.invert(scaled)
        assert restored.values == pytest.approx(vector.values)
        assert not restored.scaled


def test_scaler_dict_round_trip():
    """Scaler parameters survive to_dict/from_dict."""
    scaler = fit_scaler(_vectors([[1.0, 2.0], [3.0, 5.0]]))
    assert FeatureScaler.from_dict(scaler.to_dict()) == scaler


def test_scaler_errors():
    """Empty, ragged, mismatched and double scaling are rejected."""
    with pytest.raises(EmptyTrainingSet):
        fit_scaler([])
    with pytest.raises(LengthMismatch):
        fit_scaler([FeatureVector((1.0,)), FeatureVector((1.0, 2.0))])
    with pytest.raises(ValueError):
        fit_scaler(_vectors([[1.0]]), "robust")

    scaler = fit_scaler(_vectors([[1.0, 2.0], [2.0, 3.0]]))
    with pytest.raises(LengthMismatch):
        scaler.apply(FeatureVector((1.0, 2.0, 3.0)))
    with pytest.raises(ScalingMismatch):
        scaler.apply(FeatureVector((1.0, 2.0), scaled=True))
    with pytest.raises(ScalingMismatch):
        scaler.invert(FeatureVector((1.0, 2.0)))


def test_matches_sklearn_scalers():
    """Standard agrees with StandardScaler; minmax with MinMaxScaler except on constant columns."""
    rng = np.random.default_rng(8)
    raw = rng.normal(10.0, 4.0, size=(30, 3))
    raw[:, 1] = 7.0
    training = _vectors(raw)

    standard = np.array([fit_scaler(training).apply(v).values for v in training])
    assert np.allclose(standard, StandardScaler().fit_transform(raw), atol=1e-12)

    minmax = np.array([fit_scaler(training, "minmax").apply(v).values for v in training])
    reference = MinMaxScaler(feature_range=(-1, 1)).fit_transform(raw)
    assert np.allclose(minmax[:, [0, 2]], reference[:, [0, 2]], atol=1e-12)
    assert np.allclose(minmax[:, 1], 0.0)


def test_estimator_is_a_fitted_sklearn_scaler():
    """The persisted statistics rebuild a usable sklearn estimator."""
    training = _vectors([[0.0, 10.0], [4.0, 30.0]])
    est = fit_scaler(training, "minmax").estimator()
    assert isinstance(est, MinMaxScaler)
    assert est.transform(np.array([[2.0, 20.0]])) == pytest.approx(np.array([[0.0, 0.0]]))
    assert isinstance(fit_scaler(training).estimator(), StandardScaler)
