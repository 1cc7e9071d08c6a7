"""Corpus synthesis, corpus feature extraction and train/predict experiments."""

from .manifest import read_manifest, write_manifest, assign_splits
from .cache import FeatureCache, feature_key, file_digest
from .corpus import synthesize_corpus, render_clip, parse_resolution
from .extraction import ExtractionResult, extract_video_features, extract_corpus_features
from .experiment import (
    ExperimentSpec, ExperimentRun, DecayResult, MIX,
    evaluate, run_experiment, run_protocol, measure_decay,
    binomial_tail, confusion_matrix,
)
from .report import render_report, render_summary, format_report, format_runtime

__all__ = [
    "read_manifest",
    "write_manifest",
    "assign_splits",
    "FeatureCache",
    "feature_key",
    "file_digest",
    "synthesize_corpus",
    "render_clip",
    "parse_resolution",
    "ExtractionResult",
    "extract_video_features",
    "extract_corpus_features",
    "ExperimentSpec",
    "ExperimentRun",
    "DecayResult",
    "MIX",
    "evaluate",
    "run_experiment",
    "run_protocol",
    "measure_decay",
    "binomial_tail",
    "confusion_matrix",
    "render_report",
    "render_summary",
    "format_report",
    "format_runtime",
]
