"""
Join of the two extraction channels into macroblock-mode grids.

The debug stream gives each cell's type, the vector export gives the
vectors. Both come from the same decode and are indexed in output order.

Vectors exported for a skip cell are discarded and counted in MergeStats
rather than raising MvOnIntra; the exporter reports a predicted vector for
skipped blocks, so only vectors on intra cells are an error.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Dict, Tuple

from ..core.exceptions import DimensionMismatch, OrphanVector, MvOnIntra
from ..core.models import (
    FrameGrid, FrameType, MacroblockMode, MotionVector, Direction,
    MB_SIZE, grid_shape,
)
from ..utils.logger import get_logger
from .debug_parser import ParsedFrame
from .mv_parser import MvMap

logger = get_logger(__name__)


@dataclass
class MergeStats:
    """Vector bookkeeping of one merge: attached + discarded = exported."""
    exported: int = 0
    attached: int = 0
    discarded_on_skip: int = 0
    per_frame_discarded: Dict[int, int] = field(default_factory=dict)


def infer_frame_type(types, vectors: Sequence[MotionVector]) -> FrameType:
    """All intra -> I; any future-referencing vector -> B; otherwise P."""
    if all(t.is_intra for row in types for t in row):
        return FrameType.I
    if any(mv.direction is Direction.FUTURE for mv in vectors):
        return FrameType.B
    return FrameType.P


def merge_with_stats(
    frames: Sequence[ParsedFrame],
    mv_map: MvMap,
    width: int,
    height: int,
) -> Tuple[List[FrameGrid], MergeStats]:
    """merge_mb_and_mv, also returning the vector bookkeeping."""
    rows, cols = grid_shape(width, height)
    stats = MergeStats()

    extra = sorted(k for k in mv_map if k >= len(frames) or k < 0)
    if extra:
        raise OrphanVector(
            f"vectors exported for frame {extra[0]} but the debug stream has {len(frames)} frames"
        )

    grids: List[FrameGrid] = []
    for frame in frames:
        if frame.rows != rows or frame.cols != cols:
            raise DimensionMismatch(
                f"frame {frame.frame_index} is {frame.rows}x{frame.cols}, "
                f"{width}x{height} video needs {rows}x{cols}"
            )

        vectors = mv_map.get(frame.frame_index, [])
        stats.exported += len(vectors)
        buckets: Dict[Tuple[int, int], List[MotionVector]] = {}
        discarded = 0

        for mv in vectors:
            if mv.block_x < 0 or mv.block_y < 0:
                raise OrphanVector(f"frame {frame.frame_index}: block at ({mv.block_x},{mv.block_y}) lies outside the grid")
            r, c = mv.block_y // MB_SIZE, mv.block_x // MB_SIZE
            if r >= rows or c >= cols:
                raise OrphanVector(
                    f"frame {frame.frame_index}: block at ({mv.block_x},{mv.block_y}) "
                    f"lies outside the {rows}x{cols} grid"
                )
            mb_type = frame.types[r][c]
            if mb_type.is_intra:
                raise MvOnIntra(
                    f"frame {frame.frame_index}: vector attached to {mb_type.token} cell ({r},{c})"
                )
            if mb_type.is_skip:
                # The exporter also emits the predicted vector of skipped blocks
                discarded += 1
                continue
            buckets.setdefault((r, c), []).append(mv)

        cells = tuple(
            tuple(
                MacroblockMode(frame.types[r][c], tuple(buckets.get((r, c), ())))
                for c in range(cols)
            )
            for r in range(rows)
        )
        frame_type = frame.frame_type or infer_frame_type(frame.types, vectors)
        grids.append(FrameGrid(frame.frame_index, frame_type, rows, cols, cells))

        stats.attached += len(vectors) - discarded
        stats.discarded_on_skip += discarded
        if discarded:
            stats.per_frame_discarded[frame.frame_index] = discarded

    if stats.discarded_on_skip:
        logger.debug(
            f"Discarded {stats.discarded_on_skip} predicted vectors on skipped macroblocks "
            f"({stats.attached} attached)"
        )
    return grids, stats


def merge_mb_and_mv(
    frames: Sequence[ParsedFrame],
    mv_map: MvMap,
    width: int,
    height: int,
) -> List[FrameGrid]:
    """
    Attach every vector to the cell holding its block origin.

    Vectors that land on skipped cells are dropped; skip modes never compare
    vectors. A vector on an intra cell means the two channels disagree.

    Raises:
        DimensionMismatch: A type matrix does not match the frame size
        OrphanVector: Vector block outside the grid, or for a missing frame
        MvOnIntra: Vector landing on an intra cell
    """
    grids, _ = merge_with_stats(frames, mv_map, width, height)
    return grids
