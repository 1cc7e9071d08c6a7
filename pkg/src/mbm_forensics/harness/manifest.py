"""
Dataset manifests.

CSV `path,class,resolution,split` with `#` comment lines carrying
provenance. Relative paths resolve against the manifest's directory.
"""

import csv
import io
from pathlib import Path
from typing import List, Sequence, Dict, Tuple

import numpy as np

from ..core.exceptions import ManifestError
from ..core.models import DatasetEntry, DatasetManifest, VideoClass, VALID_RESOLUTION_TAGS
from ..utils.logger import get_logger

logger = get_logger(__name__)

HEADER = ["path", "class", "resolution", "split"]
SPLITS = ("train", "predict")


def read_manifest(path: Path, check_exists: bool = True) -> DatasetManifest:
    """
    Load and validate a manifest.

    Raises:
        ManifestError: Missing file or video, bad header/class/tag/split,
            or a path listed twice
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    root = path.parent.resolve()

    provenance: List[str] = []
    body: List[str] = []
    for line in path.read_text().splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            provenance.append(stripped.lstrip("#").strip())
        elif stripped:
            body.append(line)

    rows = list(csv.reader(body))
    if not rows or [c.strip() for c in rows[0]] != HEADER:
        raise ManifestError(f"{path}: header must be {','.join(HEADER)}")

    entries: List[DatasetEntry] = []
    seen: Dict[Path, int] = {}
    for row_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(HEADER):
            raise ManifestError(f"{path}: row {row_no} has {len(row)} fields")
        raw_path, raw_class, resolution, split = (c.strip() for c in row)

        video = Path(raw_path)
        if not video.is_absolute():
            video = root / video
        if check_exists and not video.is_file():
            raise ManifestError(f"{path}: row {row_no}: video not found: {video}")
        try:
            video_class = VideoClass.from_label(raw_class)
        except ValueError as e:
            raise ManifestError(f"{path}: row {row_no}: {e}") from e
        if resolution not in VALID_RESOLUTION_TAGS:
            raise ManifestError(f"{path}: row {row_no}: unknown resolution tag {resolution!r}")
        if split not in SPLITS:
            raise ManifestError(f"{path}: row {row_no}: split must be train or predict, got {split!r}")
        if video in seen:
            raise ManifestError(f"{path}: {video} listed on rows {seen[video]} and {row_no}")
        seen[video] = row_no

        entries.append(DatasetEntry(video, video_class, resolution, split))

    logger.debug(f"Loaded manifest {path}: {len(entries)} entries")
    return DatasetManifest(entries=entries, provenance=provenance, root=root)


def format_manifest(manifest: DatasetManifest, relative_to: Path = None) -> str:
    buffer = io.StringIO()
    for note in manifest.provenance:
        buffer.write(f"# {note}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for entry in manifest.entries:
        video = entry.path
        if relative_to is not None:
            try:
                video = video.resolve().relative_to(Path(relative_to).resolve())
            except ValueError:
                pass
        writer.writerow([video.as_posix(), entry.video_class.label, entry.resolution, entry.split])
    return buffer.getvalue()


def write_manifest(manifest: DatasetManifest, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_manifest(manifest, relative_to=path.parent))
    return path


def assign_splits(
    items: Sequence[Tuple[Path, VideoClass, str]],
    train_fraction: float,
    seed: int,
) -> List[DatasetEntry]:
    """
    Seeded per-class split: after shuffling each class, the first
    train_fraction of it goes to train, the rest to predict.
    """
    rng = np.random.default_rng(seed)
    split_of: Dict[Path, str] = {}
    for video_class in VideoClass:
        members = sorted((p for p, c, _ in items if c is video_class), key=str)
        if not members:
            continue
        order = rng.permutation(len(members))
        n_train = int(round(len(members) * train_fraction))
        if len(members) >= 2:
            n_train = min(max(n_train, 1), len(members) - 1)
        for rank, k in enumerate(order):
            split_of[members[k]] = "train" if rank < n_train else "predict"

    return [DatasetEntry(p, c, tag, split_of[p]) for p, c, tag in items]
