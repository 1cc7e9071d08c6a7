"""
Subcommand implementations.

Each command takes the parsed arguments, the effective Config and an output
stream, writes data (CSV, JSON or a verdict line) to that stream only and
returns the exit code. Failures surface as MbmError and are rendered by
main().
"""

import json
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, TextIO

import numpy as np

from ..codec.orchestrator import LADDER_FILE, build_ladder, load_ladder, ladder_feature_vector
from ..codec.tools import CodecTools
from ..core.exceptions import InsufficientTrainingData, UsageError
from ..core.models import (
    BINARY_LABELS, MULTICLASS_LABELS, FeatureVector, VideoClass,
)
from ..feature.scaler import fit_scaler
from ..feature.store import (
    FeatureTableMeta, combine_feature_tables, format_feature_table, read_feature_table,
    write_feature_table,
)
from ..harness.cache import FeatureCache
from ..harness.corpus import synthesize_corpus
from ..harness.experiment import (
    MIX, ExperimentSpec, adapted_folds, evaluate, measure_decay, run_protocol,
)
from ..harness.extraction import extract_video_features
from ..harness.manifest import read_manifest
from ..harness.report import format_runtime, render_report, render_summary
from ..svm.grid_search import DEFAULT_C_GRID, DEFAULT_GAMMA_GRID, grid_search, log2_grid
from ..svm.model import SvmModel
from ..svm.model_io import read_model, write_model
from ..svm.multiclass import classify, train_multiclass
from ..utils.logger import get_logger

logger = get_logger(__name__)


def parse_grid(text: Optional[str], default: List[float]) -> List[float]:
    """
    Parameter grid from the command line.

    'a:b' or 'a:b:s' are base-2 exponents (2^a .. 2^b, step s, default 2);
    anything else is a comma-separated list of values.
    """
    if not text:
        return list(default)
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise UsageError(f"grid range must be start:stop[:step], got {text!r}")
        return log2_grid(*parts)
    return [float(v) for v in text.split(",") if v.strip()]


def class_names_for(model: SvmModel) -> Dict[int, str]:
    return dict(BINARY_LABELS) if tuple(model.classes) == (0, 1) else dict(MULTICLASS_LABELS)


def _emit_json(out: TextIO, payload) -> None:
    out.write(json.dumps(payload, sort_keys=True, default=str) + "\n")


def _is_ladder_dir(path: Path) -> bool:
    return path.is_dir() and (path / LADDER_FILE).is_file()


def _features_of(path: Path, n: int, config, tools: CodecTools) -> FeatureVector:
    """Feature vector of a video (cached) or of an existing ladder directory."""
    if _is_ladder_dir(path):
        return ladder_feature_vector(load_ladder(path, tools), n)
    return extract_video_features(
        path, n, config.encode_config(), tools,
        cache=FeatureCache(config.get_cache_dir()),
        work_dir=config.get_work_dir(),
        keep=config.get("keep"),
    )


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_ladder(args, config, out: TextIO) -> int:
    tools = CodecTools.from_config(config)
    ladder = build_ladder(
        Path(args.input), args.n, config.encode_config(), tools,
        directory=Path(args.out) if args.out else None,
        work_dir=config.get_work_dir(),
    )
    if args.json:
        _emit_json(out, {
            "ladder": str(ladder.directory),
            "source": str(ladder.source),
            "n": ladder.n,
            "frames": ladder.frame_count,
            "tool_version": ladder.tool_version,
        })
    else:
        out.write(f"{ladder.directory}\n")
    return 0


def cmd_extract(args, config, out: TextIO) -> int:
    tools = CodecTools.from_config(config)
    label = int(VideoClass.from_label(args.label)) if args.label else None

    vectors = []
    for raw in args.inputs:
        vector = _features_of(Path(raw), args.n, config, tools)
        vectors.append(vector.with_label(label))

    if args.output:
        meta = FeatureTableMeta(
            n=args.n,
            tool_version=tools.version(),
            encode_config=config.encode_config().to_dict(),
        )
        write_feature_table(Path(args.output), vectors, meta)
        logger.info(f"Wrote {len(vectors)} feature vectors to {args.output}")
    else:
        out.write(format_feature_table(vectors))
    return 0


def cmd_train(args, config, out: TextIO) -> int:
    vectors, meta = combine_feature_tables([read_feature_table(Path(p)) for p in args.features])
    if not vectors:
        raise InsufficientTrainingData("the feature tables hold no rows")
    if any(v.label is None for v in vectors):
        raise InsufficientTrainingData("every training row needs a label")
    labels = [min(v.label, 1) if args.binary else v.label for v in vectors]

    scaler = fit_scaler(vectors, config.get("scaling_method")) if args.scaled else None
    fit_vectors = [scaler.apply(v) for v in vectors] if scaler else vectors
    matrix = np.array([v.values for v in fit_vectors], dtype=np.float64)

    grid = grid_search(
        matrix, labels,
        c_grid=parse_grid(args.c_grid, DEFAULT_C_GRID),
        gamma_grid=parse_grid(args.gamma_grid, DEFAULT_GAMMA_GRID),
        folds=adapted_folds(labels, config.get("folds")),
        seed=config.get("seed"),
        jobs=config.get("jobs"),
    )
    model = train_multiclass(matrix, labels, grid.best_params, scaler=scaler)
    path = write_model(model, Path(args.model))

    summary = {
        "model": str(path),
        "classes": list(model.classes),
        "c": grid.best_params.c,
        "gamma": grid.best_params.gamma,
        "cv_accuracy": grid.cv_accuracy,
        "support_vectors": model.support_vector_count,
        "converged": model.converged,
        "scaled": scaler is not None,
    }
    if args.json:
        _emit_json(out, summary)
    else:
        out.write(
            f"{path}: C={summary['c']:g} gamma={summary['gamma']:g} "
            f"cv accuracy {summary['cv_accuracy']:.2%}, {summary['support_vectors']} support vectors\n"
        )
    return 0


def cmd_predict(args, config, out: TextIO) -> int:
    model = read_model(Path(args.model))
    tools = CodecTools.from_config(config)
    vector = _features_of(Path(args.input), model.dimension, config, tools)
    label, decisions = classify(model, vector)
    name = class_names_for(model)[label]

    if args.json:
        _emit_json(out, {
            "video": str(args.input),
            "class": name,
            "label": label,
            "features": list(vector.values),
            "decisions": decisions,
        })
    else:
        values = ", ".join(f"{v:.3f}" for v in vector.values)
        out.write(f"{args.input}: {name} (v = [{values}])\n")
    return 0


def cmd_evaluate(args, config, out: TextIO) -> int:
    manifest = read_manifest(Path(args.manifest))
    tools = CodecTools.from_config(config)
    c_grid = parse_grid(args.c_grid, DEFAULT_C_GRID)
    gamma_grid = parse_grid(args.gamma_grid, DEFAULT_GAMMA_GRID)

    if args.decay:
        result = measure_decay(manifest, args.n, config, tools)
        if args.json:
            _emit_json(out, asdict(result))
        else:
            out.write("k,mean_unstable\n")
            for k, value in enumerate(result.curve):
                out.write(f"{k},{value:.6f}\n")
        return 0

    if args.protocol:
        runs = run_protocol(manifest, args.n, config, tools, c_grid=c_grid, gamma_grid=gamma_grid)
        if not runs:
            raise InsufficientTrainingData("no experiment of the protocol had enough training data")
        for run in runs:
            render_report(run, Path(args.out))
        if args.json:
            _emit_json(out, [asdict(run.report) for run in runs])
        else:
            out.write(render_summary(runs))
        return 0

    spec = ExperimentSpec(
        n=args.n,
        scaled=args.scaled,
        resolution=args.resolution or MIX,
        scaling_method=config.get("scaling_method"),
        folds=config.get("folds"),
        seed=config.get("seed"),
        c_grid=tuple(c_grid),
        gamma_grid=tuple(gamma_grid),
        predict_on_train=args.predict_on_train,
    )
    run = evaluate(manifest, spec, config, tools)
    text = render_report(run, Path(args.out))
    if args.json:
        _emit_json(out, asdict(run.report))
    else:
        out.write(text + "\n" + format_runtime(run.report))
    return 0


def cmd_synthesize(args, config, out: TextIO) -> int:
    counts = {
        VideoClass.ORIGINAL: args.original,
        VideoClass.DOUBLE: args.double,
        VideoClass.TRIPLE: args.triple,
    }
    if sum(counts.values()) == 0:
        raise UsageError("nothing to synthesize: every class count is 0")
    manifest = synthesize_corpus(
        Path(args.output),
        counts,
        resolutions=args.resolution or ["320x240"],
        seed=config.get("seed"),
        config=config.encode_config(),
        tools=CodecTools.from_config(config),
        frames=config.get("clip_frames"),
        fps=config.get("clip_fps"),
        train_fraction=config.get("train_fraction"),
        jobs=config.get("jobs"),
    )
    manifest_path = Path(args.output) / "manifest.csv"
    if args.json:
        _emit_json(out, {"manifest": str(manifest_path), "clips": len(manifest.entries)})
    else:
        out.write(f"{manifest_path}\n")
    return 0


COMMANDS = {
    "ladder": cmd_ladder,
    "extract": cmd_extract,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "synthesize": cmd_synthesize,
}
