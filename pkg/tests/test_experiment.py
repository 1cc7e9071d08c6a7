"""
Test suite for train/predict experiments.

Features are synthetic and well separated so every experiment is expected to
classify its predict split perfectly.
"""

from unittest.mock import patch

import numpy as np
import pytest

from mbm_forensics.core.config import Config
from mbm_forensics.core.exceptions import InsufficientTrainingData, ManifestError
from mbm_forensics.core.models import DatasetManifest, FeatureVector, VideoClass
from mbm_forensics.harness.experiment import (
    ExperimentSpec, adapted_folds, binomial_tail, confusion_matrix, evaluate, measure_decay,
    run_experiment, run_protocol,
)
from mbm_forensics.harness.extraction import ExtractionResult

from tests.helpers import synthetic_corpus

SMALL_C = (1.0, 8.0, 64.0)
SMALL_GAMMA = (0.01, 0.1, 1.0)


@pytest.fixture
def config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return Config(environ={}, flags={"cache_dir": str(tmp_path / "cache"), "jobs": 1})


def _spec(**overrides):
    settings = dict(c_grid=SMALL_C, gamma_grid=SMALL_GAMMA, folds=3)
    settings.update(overrides)
    return ExperimentSpec(**settings)


def test_binomial_tail():
    assert binomial_tail(3, 3, 0.5) == pytest.approx(0.125)
    assert binomial_tail(2, 3, 0.5) == pytest.approx(0.5)
    assert binomial_tail(0, 7, 0.3) == pytest.approx(1.0)
    assert binomial_tail(0, 0, 0.5) == 1.0


def test_confusion_matrix_rows_are_truth():
    matrix = confusion_matrix([0, 1, 1, 2], [0, 0, 1, 2], [0, 1, 2])
    assert matrix.tolist() == [[1, 0, 0], [1, 1, 0], [0, 0, 1]]


def test_adapted_folds():
    """Folds shrink to the smallest class; below two is an error."""
    assert adapted_folds([0, 0, 0, 1, 1, 1], 5) == 3
    assert adapted_folds([0] * 10 + [1] * 10, 5) == 5
    with pytest.raises(InsufficientTrainingData):
        adapted_folds([0, 0, 1], 5)


def test_spec_labels_and_digest():
    """n < 3 is binary; the digest follows every setting."""
    binary = ExperimentSpec(n=2)
    assert binary.binary
    assert [binary.label_of(c) for c in VideoClass] == [0, 1, 1]
    three = ExperimentSpec(n=3)
    assert not three.binary
    assert [three.label_of(c) for c in VideoClass] == [0, 1, 2]
    assert three.class_names == {0: "original", 1: "double", 2: "triple"}

    assert binary.digest() == ExperimentSpec(n=2).digest()
    assert binary.digest() != ExperimentSpec(n=2, seed=1).digest()
    assert binary.digest({"x": 1}) != binary.digest({"x": 2})


def test_binary_experiment(config):
    """Double and triple clips are grouped as recompressed."""
    manifest, features = synthetic_corpus(n=2)
    run = evaluate(manifest, _spec(n=2), config, features=features)
    report = run.report

    assert report.classes == [0, 1]
    assert report.class_names == ["original", "recompressed"]
    assert report.accuracy == 1.0
    assert report.confusion == [[3, 0], [0, 6]]
    assert report.recalls == {"original": 1.0, "recompressed": 1.0}
    assert report.chance_p_value == pytest.approx(0.5 ** 9)
    assert report.config["mode"] == "binary"
    assert report.config["train_videos"] == 18
    assert report.config["c"] in SMALL_C and report.config["gamma"] in SMALL_GAMMA
    assert report.excluded == []
    assert len(report.predictions) == 9
    assert all(t == p for _, t, p in report.predictions)
    assert run.model.scaler is None


def test_three_class_scaled_experiment(config):
    """n >= 3 keeps double and triple apart; the scaler is fit on train only."""
    manifest, features = synthetic_corpus(n=3)
    run = evaluate(manifest, _spec(n=3, scaled=True, scaling_method="minmax"), config, features=features)

    assert run.report.config["mode"] == "three-class"
    assert run.report.config["scaling_method"] == "minmax"
    assert run.report.confusion == [[3, 0, 0], [0, 3, 0], [0, 0, 3]]
    assert run.model.scaler is not None
    train_matrix = np.array([v.values for v in run.train_vectors])
    assert np.allclose(run.model.scaler.transform_array(train_matrix).min(axis=0), -1.0)


def test_digest_is_deterministic(config):
    """Identical inputs give the same experiment digest and decisions."""
    manifest, features = synthetic_corpus(n=2)
    first = evaluate(manifest, _spec(n=2), config, features=features)
    second = evaluate(manifest, _spec(n=2), config, features=features)
    assert first.digest == second.digest
    assert first.report.predictions == second.report.predictions
    assert first.digest != evaluate(manifest, _spec(n=2, seed=99), config, features=features).digest


def test_predict_on_train(config):
    """The training videos can be classified in place of the predict split."""
    manifest, features = synthetic_corpus(n=2)
    report = evaluate(manifest, _spec(n=2, predict_on_train=True), config, features=features).report
    assert report.total == 18
    assert report.config["predict_on_train"]


def test_resolution_filter(config):
    """Only entries of the chosen resolution take part."""
    small_manifest, small = synthetic_corpus(n=2, resolution="720x480", seed=1)
    big_manifest, big = synthetic_corpus(n=2, resolution="1920x1080", seed=2)
    manifest = DatasetManifest(small_manifest.entries + big_manifest.entries)
    features = ExtractionResult(small.entries + big.entries, small.vectors + big.vectors, meta=small.meta)

    report = evaluate(manifest, _spec(n=2, resolution="720x480"), config, features=features).report
    assert report.total == 9
    assert all("/720x480/" in source for source, _, _ in report.predictions)
    assert evaluate(manifest, _spec(n=2), config, features=features).report.total == 18


def test_insufficient_data(config):
    """One class, too few videos per class or no predict split."""
    manifest, features = synthetic_corpus(n=2, classes=(VideoClass.ORIGINAL,))
    with pytest.raises(InsufficientTrainingData):
        evaluate(manifest, _spec(n=2), config, features=features)

    manifest, features = synthetic_corpus(n=2, train=1)
    with pytest.raises(InsufficientTrainingData):
        evaluate(manifest, _spec(n=2), config, features=features)

    manifest, features = synthetic_corpus(n=2, predict=0)
    with pytest.raises(ManifestError):
        evaluate(manifest, _spec(n=2), config, features=features)

    manifest, features = synthetic_corpus(n=2)
    with pytest.raises(InsufficientTrainingData):
        evaluate(manifest, _spec(n=3), config, features=features)


def test_run_experiment_reads_config(config):
    """Folds, seed and scaling method come from the configuration."""
    manifest, features = synthetic_corpus(n=2)
    report = run_experiment(manifest, 2, True, "", config, SMALL_C, SMALL_GAMMA, features=features)
    assert report.config["resolution"] == "MIX"
    assert report.config["scaling_method"] == config.get("scaling_method")
    assert report.config["seed"] == config.get("seed")


def test_run_protocol(config):
    """Scaled then non-scaled; resolutions too small to train are skipped."""
    good_manifest, good = synthetic_corpus(n=2, resolution="720x480", seed=3)
    thin_manifest, thin = synthetic_corpus(n=2, resolution="1920x1080", train=1, seed=4)
    manifest = DatasetManifest(good_manifest.entries + thin_manifest.entries)
    features = ExtractionResult(good.entries + thin.entries, good.vectors + thin.vectors,
                                meta=good.meta, duration_s=4.5)

    with patch("mbm_forensics.harness.experiment.extract_corpus_features", return_value=features) as extract:
        runs = run_protocol(manifest, 2, config, c_grid=SMALL_C, gamma_grid=SMALL_GAMMA)

    extract.assert_called_once()
    assert [(r.spec.scaled, r.spec.resolution) for r in runs] == [
        (True, "720x480"), (True, "MIX"), (False, "720x480"), (False, "MIX"),
    ]
    assert all(r.report.timings["extraction"] == 4.5 for r in runs)


def test_measure_decay(config):
    """Only originals are extracted; the curve is the per-step mean."""
    manifest, _ = synthetic_corpus(n=2, train=1, predict=1)
    originals = [e for e in manifest.entries if e.video_class is VideoClass.ORIGINAL]
    vectors = [FeatureVector((30.0, 10.0)), FeatureVector((20.0, 6.0))]
    features = ExtractionResult(originals, vectors)

    with patch("mbm_forensics.harness.experiment.extract_corpus_features", return_value=features) as extract:
        result = measure_decay(manifest, 2, config)

    assert result.curve == [25.0, 8.0]
    assert result.clips == 2
    assert all(e.video_class is VideoClass.ORIGINAL for e in extract.call_args.args[0].entries)

    _, features = synthetic_corpus(n=2)
    doubles = DatasetManifest([e for e in features.entries if e.video_class is VideoClass.DOUBLE])
    with pytest.raises(ManifestError):
        measure_decay(doubles, 2, config)
