"""
Builders for macroblock grids and small helpers shared by the test modules.
"""

import shutil
from pathlib import Path
from typing import Sequence

import numpy as np
import pytest

from mbm_forensics.core.models import (
    DatasetEntry, DatasetManifest, EncodeConfig, FeatureVector, VideoClass,
    Direction, FrameGrid, FrameType, MacroblockKind, MacroblockMode, MacroblockType,
    MotionVector, Partition,
)
from mbm_forensics.feature.store import FeatureTableMeta
from mbm_forensics.harness.extraction import ExtractionResult

KINDS = list(MacroblockKind)
PARTITIONS = list(Partition)


def mv(dx: int = 0, dy: int = 0, direction: Direction = Direction.PAST,
       x: int = 0, y: int = 0, w: int = 16, h: int = 16) -> MotionVector:
    return MotionVector(dx, dy, direction, x, y, w, h)


def mode(kind: MacroblockKind, partition: Partition = Partition.WHOLE_16X16,
         mvs: Sequence[MotionVector] = (), raw: str = "") -> MacroblockMode:
    if kind is MacroblockKind.OTHER and not raw:
        raw = "%"
    return MacroblockMode(MacroblockType(kind, partition, raw), tuple(mvs))


def uniform_grid(kind: MacroblockKind, rows: int = 2, cols: int = 2,
                 frame_type: FrameType = FrameType.P, index: int = 0) -> FrameGrid:
    cells = tuple(tuple(mode(kind) for _ in range(cols)) for _ in range(rows))
    return FrameGrid(index, frame_type, rows, cols, cells)


def with_cell(grid: FrameGrid, r: int, c: int, new: MacroblockMode) -> FrameGrid:
    cells = [list(row) for row in grid.cells]
    cells[r][c] = new
    return FrameGrid(grid.frame_index, grid.frame_type, grid.rows, grid.cols,
                     tuple(tuple(row) for row in cells))


def random_mv(rng: np.random.Generator) -> MotionVector:
    return mv(
        dx=int(rng.integers(-2, 3)),
        dy=int(rng.integers(-2, 3)),
        direction=Direction.PAST if rng.random() < 0.7 else Direction.FUTURE,
        x=int(rng.integers(0, 2)) * 8,
        y=int(rng.integers(0, 2)) * 8,
        w=8, h=8,
    )


def random_mode(rng: np.random.Generator) -> MacroblockMode:
    kind = KINDS[int(rng.integers(len(KINDS)))]
    partition = PARTITIONS[int(rng.integers(len(PARTITIONS)))]
    mvs = [random_mv(rng) for _ in range(int(rng.integers(0, 3)))]
    raw = "AP"[int(rng.integers(2))] if kind is MacroblockKind.OTHER else ""
    return MacroblockMode(MacroblockType(kind, partition, raw), tuple(mvs))


def random_grid(rng: np.random.Generator, rows: int, cols: int,
                frame_type: FrameType, index: int = 0) -> FrameGrid:
    if frame_type is FrameType.I:
        cells = tuple(
            tuple(mode(MacroblockKind.INTRA_4X4 if rng.random() < 0.5 else MacroblockKind.INTRA_16X16)
                  for _ in range(cols))
            for _ in range(rows)
        )
    else:
        cells = tuple(tuple(random_mode(rng) for _ in range(cols)) for _ in range(rows))
    return FrameGrid(index, frame_type, rows, cols, cells)


def perturb(rng: np.random.Generator, grid: FrameGrid, rate: float = 0.4) -> FrameGrid:
    """Copy of grid with some cells replaced (I-frames keep intra cells)."""
    out = grid
    for r in range(grid.rows):
        for c in range(grid.cols):
            if rng.random() >= rate:
                continue
            if grid.frame_type is FrameType.I:
                new = mode(MacroblockKind.INTRA_4X4 if rng.random() < 0.5 else MacroblockKind.INTRA_16X16)
            else:
                new = random_mode(rng)
            out = with_cell(out, r, c, new)
    return out


def codec_tools_available() -> bool:
    return all(shutil.which(tool) for tool in ("ffmpeg", "ffprobe", "extract_mvs"))


requires_codec_tools = pytest.mark.skipif(
    not codec_tools_available(),
    reason="ffmpeg, ffprobe and extract_mvs must be on PATH",
)


class PinnedTools:
    """Stand-in for CodecTools that never starts a process."""

    codec_tool = "ffmpeg"

    def __init__(self, version: str = "ffmpeg version 6.1.1"):
        self._version = version

    def version(self) -> str:
        return self._version

    def resolve(self, tool: str) -> str:
        return f"/usr/bin/{tool}"


CLASS_CENTRES = {
    VideoClass.ORIGINAL: (1.0, 1.0, 1.0),
    VideoClass.DOUBLE: (10.0, 5.0, 2.0),
    VideoClass.TRIPLE: (20.0, 15.0, 10.0),
}


def synthetic_corpus(n: int = 2, train: int = 6, predict: int = 3, resolution: str = "other",
                     seed: int = 0, classes: Sequence[VideoClass] = tuple(CLASS_CENTRES)):
    """Manifest plus an ExtractionResult of well separated feature clusters."""
    rng = np.random.default_rng(seed)
    entries, vectors = [], []
    for video_class in classes:
        centre = np.array(CLASS_CENTRES[video_class][:n])
        for k in range(train + predict):
            split = "train" if k < train else "predict"
            path = Path(f"/corpus/{resolution}/{video_class.label}_{k:02d}.mp4")
            entries.append(DatasetEntry(path, video_class, resolution, split))
            values = tuple(float(x) for x in centre + rng.normal(0.0, 0.3, size=n))
            vectors.append(FeatureVector(values, label=int(video_class), source=str(path)))
    meta = FeatureTableMeta(n=n, tool_version="ffmpeg version 6.1.1",
                            encode_config=EncodeConfig().to_dict(), sources=[v.source for v in vectors])
    return DatasetManifest(entries, provenance=["synthetic"]), ExtractionResult(entries, vectors, meta=meta)
