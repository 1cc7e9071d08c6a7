"""
Experiment reports.

The text report is for people; the CSV files next to it are for scripts.
Everything of one experiment goes to `<out>/exp-<digest>/`:

    report.txt        confusion matrix, accuracy, recalls
    report.csv        key,value summary
    confusion.csv     true class rows, predicted class columns
    predictions.csv   video,true,predicted
    timings.csv       stage,seconds
    resources.yaml    machine the experiment ran on, process metrics
    features.csv      train then predict vectors (+ .meta.yaml)
    model.svm         trained model

Only timings.csv and resources.yaml change between runs over the same
features, seed and configuration.
"""

import csv
import io
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import yaml

from ..core.models import EvaluationReport
from ..feature.store import FeatureTableMeta, write_feature_table
from ..svm.model_io import write_model
from ..utils.logger import get_logger
from .experiment import ExperimentRun, MIX

logger = get_logger(__name__)

STAGES = ("extraction", "grid_search", "training", "prediction")


def _csv(rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def format_report(report: EvaluationReport) -> str:
    cfg = report.config
    lines = [
        f"Experiment {cfg.get('experiment', '-')}  {cfg.get('mode', '')}, "
        f"{'scaled (' + str(cfg.get('scaling_method')) + ')' if cfg.get('scaled') else 'non-scaled'}, "
        f"resolution {cfg.get('resolution', MIX)}, n={cfg.get('n')}",
        f"SVM: C={cfg.get('c', 0):g} gamma={cfg.get('gamma', 0):g} "
        f"(cv accuracy {cfg.get('cv_accuracy', 0):.4f}, {cfg.get('folds')} folds)",
        "",
        "Confusion matrix (rows: true, columns: predicted)",
    ]
    width = max([len(n) for n in report.class_names] + [8]) + 2
    lines.append(" " * width + "".join(name.rjust(width) for name in report.class_names))
    for name, row in zip(report.class_names, report.confusion):
        lines.append(name.ljust(width) + "".join(str(v).rjust(width) for v in row))

    lines += [
        "",
        f"Accuracy: {report.accuracy:.2%} ({report.correct}/{report.total})",
        "Recall: " + ", ".join(f"{name} {value:.2%}" for name, value in report.recalls.items()),
    ]
    if report.chance_p_value is not None:
        chance = 1.0 / len(report.classes)
        lines.append(f"Binomial p-value vs chance ({chance:.1%}): {report.chance_p_value:.3g}")

    if report.excluded:
        lines += ["", f"Excluded ({len(report.excluded)}):"] + [f"  {p}" for p in report.excluded]
    return "\n".join(lines) + "\n"


def format_runtime(report: EvaluationReport) -> str:
    """Stage timings and the machine; differs between otherwise identical runs."""
    lines: List[str] = []
    if report.timings:
        lines.append("Stage timings")
        for stage in list(STAGES) + sorted(set(report.timings) - set(STAGES)):
            if stage in report.timings:
                lines.append(f"  {stage:<14}{report.timings[stage]:>10.3f} s")
        lines.append(f"  {'total':<14}{sum(report.timings.values()):>10.3f} s")

    res = report.resources
    if res:
        lines.append(
            f"Resources: {res.get('os_name', '?')}, {res.get('processor', '?')}, "
            f"{res.get('cpu_count', '?')} CPUs, {res.get('memory_total_gb', 0):.1f} GB RAM, "
            f"peak RSS {res.get('peak_rss_mb', 0):.1f} MB"
        )
        errors = res.get("metrics", {}).get("counters", {}).get("errors", 0)
        if errors:
            lines.append(f"Errors logged in this process: {errors}")
    return "\n".join(lines) + "\n" if lines else ""


def report_csv(report: EvaluationReport) -> str:
    rows: List[Sequence] = [["key", "value"]]
    rows += [[k, "" if v is None else v] for k, v in report.config.items()]
    rows += [
        ["total", report.total],
        ["correct", report.correct],
        ["accuracy", f"{report.accuracy:.6f}"],
    ]
    rows += [[f"recall_{name}", f"{value:.6f}"] for name, value in report.recalls.items()]
    if report.chance_p_value is not None:
        rows.append(["chance_p_value", f"{report.chance_p_value:.6g}"])
    rows.append(["excluded", len(report.excluded)])
    return _csv(rows)


def confusion_csv(report: EvaluationReport) -> str:
    rows: List[Sequence] = [["true\\predicted"] + list(report.class_names)]
    rows += [[name] + list(row) for name, row in zip(report.class_names, report.confusion)]
    return _csv(rows)


def predictions_csv(report: EvaluationReport) -> str:
    names = dict(zip(report.classes, report.class_names))
    rows: List[Sequence] = [["video", "true", "predicted"]]
    rows += [[video, names[t], names[p]] for video, t, p in report.predictions]
    return _csv(rows)


def timings_csv(report: EvaluationReport) -> str:
    return _csv([["stage", "seconds"]] + [[k, f"{v:.6f}"] for k, v in report.timings.items()])


def render_report(
    report: Union[EvaluationReport, ExperimentRun],
    out_dir: Optional[Path] = None,
) -> str:
    """
    Text report; with out_dir, also writes the experiment directory.

    Passing an ExperimentRun adds the feature table and the model to the
    written artifacts.
    """
    run = report if isinstance(report, ExperimentRun) else None
    report = run.report if run else report
    text = format_report(report)
    if out_dir is None:
        return text

    directory = Path(out_dir) / f"exp-{report.config.get('experiment', 'unnamed')}"
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "report.txt").write_text(text)
    (directory / "report.csv").write_text(report_csv(report))
    (directory / "confusion.csv").write_text(confusion_csv(report))
    (directory / "predictions.csv").write_text(predictions_csv(report))
    (directory / "timings.csv").write_text(timings_csv(report))
    with open(directory / "resources.yaml", "w") as f:
        yaml.safe_dump(report.resources, f, sort_keys=True)

    if run is not None:
        vectors = run.train_vectors + run.predict_vectors
        base = run.feature_meta or FeatureTableMeta(n=run.spec.n)
        meta = FeatureTableMeta(
            n=run.spec.n,
            tool_version=base.tool_version,
            encode_config=dict(base.encode_config),
            sources=[v.source for v in vectors],
        )
        write_feature_table(directory / "features.csv", vectors, meta)
        write_model(run.model, directory / "model.svm")

    logger.info(f"Report written to {directory}")
    return text


def render_summary(runs: Sequence[ExperimentRun]) -> str:
    """Accuracy table: rows Scaled / Non-scaled, columns resolutions then MIX."""
    columns: List[str] = []
    for run in runs:
        tag = run.spec.resolution
        if tag not in columns:
            columns.append(tag)
    columns.sort(key=lambda t: (t == MIX, t))

    cells: Dict[tuple, str] = {
        (run.spec.scaled, run.spec.resolution): f"{run.report.accuracy:.2%}" for run in runs
    }
    width = max([len(c) for c in columns] + [8]) + 2
    lines = [" " * 12 + "".join(c.rjust(width) for c in columns)]
    for scaled, label in ((True, "Scaled"), (False, "Non-scaled")):
        lines.append(label.ljust(12) + "".join(cells.get((scaled, c), "-").rjust(width) for c in columns))
    return "\n".join(lines) + "\n"
