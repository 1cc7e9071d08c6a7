"""
Train/predict experiments over a labelled corpus.

An experiment filters the manifest by resolution, fits the scaler (when
scaled) and grid-searches the SVM on the train split only, then classifies
every predict-split video. The binary experiment groups double and triple
clips as "recompressed"; the three-class one keeps them apart.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Sequence, Dict, Any, Tuple

import numpy as np
from sklearn import metrics as skmetrics

from ..codec.tools import CodecTools
from ..core.exceptions import InsufficientTrainingData, ManifestError
from ..core.models import (
    DatasetManifest, EvaluationReport, FeatureVector, VideoClass,
    BINARY_LABELS, MULTICLASS_LABELS,
)
from ..feature.mbm import decay_curve
from ..feature.scaler import fit_scaler
from ..svm.grid_search import grid_search, DEFAULT_C_GRID, DEFAULT_GAMMA_GRID
from ..svm.model import SvmModel, GridSearchResult
from ..svm.multiclass import train_multiclass, classify
from ..utils.logger import get_logger, TimerContext, metrics_collector
from ..utils.performance_monitor import PerformanceMonitor
from .extraction import ExtractionResult, extract_corpus_features

logger = get_logger(__name__)

MIX = "MIX"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that decides an experiment's outcome."""
    n: int = 2
    scaled: bool = False
    resolution: str = MIX
    scaling_method: str = "standard"
    folds: int = 5
    seed: int = 1234
    c_grid: Tuple[float, ...] = tuple(DEFAULT_C_GRID)
    gamma_grid: Tuple[float, ...] = tuple(DEFAULT_GAMMA_GRID)
    predict_on_train: bool = False

    @property
    def binary(self) -> bool:
        return self.n < 3

    @property
    def class_names(self) -> Dict[int, str]:
        return dict(BINARY_LABELS) if self.binary else dict(MULTICLASS_LABELS)

    def label_of(self, video_class: VideoClass) -> int:
        if self.binary:
            return 0 if video_class is VideoClass.ORIGINAL else 1
        return int(video_class)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["c_grid"] = list(self.c_grid)
        data["gamma_grid"] = list(self.gamma_grid)
        data["binary"] = self.binary
        return data

    def digest(self, extra: Optional[Dict[str, Any]] = None) -> str:
        payload = json.dumps({"spec": self.to_dict(), **(extra or {})}, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class ExperimentRun:
    """Report plus the artifacts it was computed from."""
    spec: ExperimentSpec
    report: EvaluationReport
    model: SvmModel
    grid: GridSearchResult
    train_vectors: List[FeatureVector] = field(default_factory=list)
    predict_vectors: List[FeatureVector] = field(default_factory=list)
    feature_meta: Any = None
    digest: str = ""


def binomial_tail(successes: int, trials: int, p: float) -> float:
    """P(X >= successes) for X ~ Binomial(trials, p), exact."""
    if trials <= 0:
        return 1.0
    return float(sum(
        math.comb(trials, k) * p ** k * (1.0 - p) ** (trials - k)
        for k in range(successes, trials + 1)
    ))


def confusion_matrix(true: Sequence[int], predicted: Sequence[int], classes: Sequence[int]) -> np.ndarray:
    """Rows are true classes, columns predicted classes, both in the order of classes."""
    return skmetrics.confusion_matrix(list(true), list(predicted), labels=list(classes))


def adapted_folds(labels: Sequence[int], requested: int) -> int:
    counts = np.unique(np.asarray(labels), return_counts=True)[1]
    folds = min(requested, int(counts.min()))
    if folds < 2:
        raise InsufficientTrainingData(
            f"cross-validation needs 2 training videos per class, smallest class has {int(counts.min())}"
        )
    if folds < requested:
        logger.warning(f"Reducing cross-validation from {requested} to {folds} folds (smallest class)")
    return folds


def evaluate(
    manifest: DatasetManifest,
    spec: ExperimentSpec,
    config,
    tools: Optional[CodecTools] = None,
    features: Optional[ExtractionResult] = None,
) -> ExperimentRun:
    """
    Run one experiment and keep its artifacts.

    Args:
        manifest: Full corpus manifest
        spec: Experiment settings
        config: Effective Config (encoder settings, jobs, cache)
        tools: External tools
        features: Previously extracted features of the manifest, reused
            instead of extracting again

    Raises:
        InsufficientTrainingData: Fewer than two classes, or fewer than two
            videos of some class, in the filtered train split
        ManifestError: Empty predict split
    """
    monitor = PerformanceMonitor()
    timings: Dict[str, float] = {}
    filtered = manifest.filter_resolution(spec.resolution)

    if features is None:
        features = extract_corpus_features(filtered, spec.n, config, tools)
        timings["extraction"] = features.duration_s
    else:
        timings["extraction"] = 0.0
    features = features.for_entries(filtered.entries)

    train = [
        v.with_label(spec.label_of(e.video_class))
        for e, v in zip(features.entries, features.vectors) if e.split == "train"
    ]
    if spec.predict_on_train:
        held_out = list(train)
    else:
        held_out = [
            v.with_label(spec.label_of(e.video_class))
            for e, v in zip(features.entries, features.vectors) if e.split == "predict"
        ]

    train_labels = [v.label for v in train]
    if len(set(train_labels)) < 2:
        raise InsufficientTrainingData(
            f"train split of resolution {spec.resolution} has classes {sorted(set(train_labels))}"
        )
    if not held_out:
        raise ManifestError(f"predict split of resolution {spec.resolution} is empty")
    if any(v.n != spec.n for v in train + held_out):
        raise InsufficientTrainingData(f"feature vectors do not all have length {spec.n}")
    folds = adapted_folds(train_labels, spec.folds)

    scaler = fit_scaler(train, spec.scaling_method) if spec.scaled else None
    fit_vectors = [scaler.apply(v) for v in train] if scaler else train
    matrix = np.array([v.values for v in fit_vectors], dtype=np.float64)

    with TimerContext(logger, "grid_search") as timer:
        grid = grid_search(
            matrix, train_labels,
            c_grid=spec.c_grid, gamma_grid=spec.gamma_grid,
            folds=folds, seed=spec.seed, jobs=config.get("jobs"),
        )
    timings["grid_search"] = timer.duration_s

    with TimerContext(logger, "training") as timer:
        model = train_multiclass(matrix, train_labels, grid.best_params, scaler=scaler)
    timings["training"] = timer.duration_s

    with TimerContext(logger, "prediction") as timer:
        predicted = [classify(model, v.with_label(None))[0] for v in held_out]
    timings["prediction"] = timer.duration_s

    class_ids = sorted(spec.class_names)
    truth = [v.label for v in held_out]
    confusion = confusion_matrix(truth, predicted, class_ids)
    total = int(confusion.sum())
    correct = int(np.trace(confusion))
    accuracy = correct / total

    names = [spec.class_names[c] for c in class_ids]
    recalls = {
        names[k]: float(confusion[k, k] / confusion[k].sum())
        for k in range(len(class_ids)) if confusion[k].sum() > 0
    }

    tool_version = features.meta.tool_version if features.meta else ""
    digest = spec.digest({
        "entries": [(str(e.path), e.video_class.label, e.split) for e in filtered.entries],
        "encode_config": features.meta.encode_config if features.meta else {},
        "tool_version": tool_version,
    })
    report = EvaluationReport(
        classes=class_ids,
        class_names=names,
        confusion=confusion.tolist(),
        accuracy=accuracy,
        recalls=recalls,
        config={
            "experiment": digest,
            "n": spec.n,
            "mode": "binary" if spec.binary else "three-class",
            "scaled": spec.scaled,
            "scaling_method": spec.scaling_method if spec.scaled else None,
            "resolution": spec.resolution,
            "c": grid.best_params.c,
            "gamma": grid.best_params.gamma,
            "cv_accuracy": grid.cv_accuracy,
            "folds": folds,
            "seed": spec.seed,
            "train_videos": len(train),
            "predict_videos": len(held_out),
            "predict_on_train": spec.predict_on_train,
            "converged": model.converged,
            "tool_version": tool_version,
        },
        timings=timings,
        resources={
            **monitor.snapshot().to_dict(),
            "peak_rss_mb": monitor.peak_rss_mb,
            "metrics": metrics_collector.get_metrics(),
        },
        predictions=[(v.source, t, p) for v, t, p in zip(held_out, truth, predicted)],
        excluded=features.excluded,
        chance_p_value=binomial_tail(correct, total, 1.0 / len(class_ids)),
    )
    logger.info(
        f"Experiment {digest} ({report.config['mode']}, "
        f"{'scaled' if spec.scaled else 'non-scaled'}, {spec.resolution}): "
        f"accuracy {accuracy:.2%} on {total} videos"
    )
    return ExperimentRun(
        spec=spec,
        report=report,
        model=model,
        grid=grid,
        train_vectors=train,
        predict_vectors=held_out,
        feature_meta=features.meta,
        digest=digest,
    )


def run_experiment(
    manifest: DatasetManifest,
    n: int,
    scaled: bool,
    resolution: str,
    config,
    c_grid: Optional[Sequence[float]] = None,
    gamma_grid: Optional[Sequence[float]] = None,
    tools: Optional[CodecTools] = None,
    features: Optional[ExtractionResult] = None,
) -> EvaluationReport:
    """Single experiment; see `evaluate` for the artifacts as well."""
    spec = ExperimentSpec(
        n=n,
        scaled=scaled,
        resolution=resolution or MIX,
        scaling_method=config.get("scaling_method"),
        folds=config.get("folds"),
        seed=config.get("seed"),
        c_grid=tuple(c_grid or DEFAULT_C_GRID),
        gamma_grid=tuple(gamma_grid or DEFAULT_GAMMA_GRID),
    )
    return evaluate(manifest, spec, config, tools, features).report


def run_protocol(
    manifest: DatasetManifest,
    n: int,
    config,
    tools: Optional[CodecTools] = None,
    c_grid: Optional[Sequence[float]] = None,
    gamma_grid: Optional[Sequence[float]] = None,
    resolutions: Optional[Sequence[str]] = None,
) -> List[ExperimentRun]:
    """
    Every resolution present (plus MIX), scaled and non-scaled.

    Features are extracted once. Cells whose train split is too small are
    skipped with a warning.
    """
    features = extract_corpus_features(manifest, n, config, tools)
    if resolutions is None:
        present = sorted({e.resolution for e in manifest.entries})
        resolutions = present + [MIX] if len(present) > 1 else present or [MIX]

    runs: List[ExperimentRun] = []
    for scaled in (True, False):
        for resolution in resolutions:
            spec = ExperimentSpec(
                n=n,
                scaled=scaled,
                resolution=resolution,
                scaling_method=config.get("scaling_method"),
                folds=config.get("folds"),
                seed=config.get("seed"),
                c_grid=tuple(c_grid or DEFAULT_C_GRID),
                gamma_grid=tuple(gamma_grid or DEFAULT_GAMMA_GRID),
            )
            try:
                run = evaluate(manifest, spec, config, tools, features)
            except (InsufficientTrainingData, ManifestError) as e:
                logger.warning(f"Skipping {'scaled' if scaled else 'non-scaled'} {resolution}: {e}")
                continue
            run.report.timings["extraction"] = features.duration_s
            runs.append(run)
    return runs


@dataclass
class DecayResult:
    curve: List[float]
    clips: int
    excluded: List[str] = field(default_factory=list)


def measure_decay(
    manifest: DatasetManifest,
    n: int,
    config,
    tools: Optional[CodecTools] = None,
) -> DecayResult:
    """Mean unstable macroblocks per ladder step over the corpus originals."""
    originals = DatasetManifest(
        entries=[e for e in manifest.entries if e.video_class is VideoClass.ORIGINAL],
        provenance=list(manifest.provenance),
        root=manifest.root,
    )
    if not originals.entries:
        raise ManifestError("the manifest lists no original clips")
    features = extract_corpus_features(originals, n, config, tools)
    curve = decay_curve(features.vectors)
    logger.info(f"Decay over {len(features.vectors)} clips: {[round(v, 3) for v in curve]}")
    return DecayResult(curve=curve, clips=len(features.vectors), excluded=features.excluded)
