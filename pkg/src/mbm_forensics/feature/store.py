"""
Feature table persistence.

CSV body with header `label,v0,v1[,v2]` and six fractional digits, plus a
YAML sidecar `<csv>.meta.yaml` recording how the features were made.
"""

import csv
import io
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import List, Optional, Dict, Any, Sequence, Tuple

import yaml

from ..core.exceptions import LengthMismatch, ToolVersionMismatch, ModelFormatError
from ..core.models import FeatureVector
from ..utils.logger import get_logger

logger = get_logger(__name__)

META_SUFFIX = ".meta.yaml"


@dataclass
class FeatureTableMeta:
    n: int
    scaled: bool = False
    scaling_method: Optional[str] = None
    scaler: Optional[Dict[str, Any]] = None
    tool_version: str = ""
    encode_config: Dict[str, Any] = field(default_factory=dict)
    sources: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureTableMeta":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


def meta_path(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + META_SUFFIX)


def format_feature_table(vectors: Sequence[FeatureVector]) -> str:
    """Render the CSV body; every vector must have the same length."""
    lengths = {v.n for v in vectors}
    if len(lengths) > 1:
        raise LengthMismatch(f"feature vectors of mixed length {sorted(lengths)}")
    n = lengths.pop() if lengths else 0

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label"] + [f"v{i}" for i in range(n)])
    for v in vectors:
        label = "" if v.label is None else str(v.label)
        writer.writerow([label] + [f"{x:.6f}" for x in v.values])
    return buffer.getvalue()


def write_feature_table(
    path: Path,
    vectors: Sequence[FeatureVector],
    meta: Optional[FeatureTableMeta] = None,
) -> Path:
    """Write the CSV and its sidecar; returns the CSV path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_feature_table(vectors))

    if meta is None:
        meta = FeatureTableMeta(n=vectors[0].n if vectors else 0)
    if not meta.sources:
        meta.sources = [v.source for v in vectors]
    with open(meta_path(path), "w") as f:
        yaml.safe_dump(meta.to_dict(), f, sort_keys=False)

    logger.debug(f"Wrote {len(vectors)} feature vectors to {path}")
    return path


def parse_feature_table(text: str, scaled: bool = False, sources: Sequence[str] = ()) -> List[FeatureVector]:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        return []
    header = rows[0]
    if not header or header[0] != "label" or header[1:] != [f"v{i}" for i in range(len(header) - 1)]:
        raise ModelFormatError(f"feature table header must be label,v0,v1,...: got {','.join(header)}")

    vectors = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise LengthMismatch(f"feature table line {line_no}: {len(row)} fields, expected {len(header)}")
        try:
            label = int(row[0]) if row[0].strip() else None
            values = tuple(float(x) for x in row[1:])
        except ValueError as e:
            raise ModelFormatError(f"feature table line {line_no}: {e}") from e
        source = sources[line_no - 2] if line_no - 2 < len(sources) else ""
        vectors.append(FeatureVector(values, scaled=scaled, label=label, source=source))
    return vectors


def read_feature_table(path: Path) -> Tuple[List[FeatureVector], FeatureTableMeta]:
    """Read a CSV and its sidecar (sidecar optional)."""
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"feature table not found: {path}")

    sidecar = meta_path(path)
    if sidecar.is_file():
        with open(sidecar, "r") as f:
            meta = FeatureTableMeta.from_dict(yaml.safe_load(f) or {"n": 0})
    else:
        meta = None

    vectors = parse_feature_table(
        path.read_text(),
        scaled=meta.scaled if meta else False,
        sources=meta.sources if meta else (),
    )
    if meta is None:
        meta = FeatureTableMeta(n=vectors[0].n if vectors else 0)
    return vectors, meta


def combine_feature_tables(
    tables: Sequence[Tuple[List[FeatureVector], FeatureTableMeta]],
) -> Tuple[List[FeatureVector], FeatureTableMeta]:
    """Concatenate tables; refuses to mix tool versions or feature lengths."""
    if not tables:
        return [], FeatureTableMeta(n=0)
    first_meta = tables[0][1]
    vectors: List[FeatureVector] = []
    sources: List[str] = []
    for table_vectors, meta in tables:
        if meta.tool_version != first_meta.tool_version:
            raise ToolVersionMismatch(
                f"feature tables from {first_meta.tool_version!r} and {meta.tool_version!r}"
            )
        if meta.n != first_meta.n or meta.scaled != first_meta.scaled:
            raise LengthMismatch("feature tables differ in length or scaling")
        vectors.extend(table_vectors)
        sources.extend(v.source for v in table_vectors)
    combined = FeatureTableMeta.from_dict(first_meta.to_dict())
    combined.sources = sources
    return vectors, combined
