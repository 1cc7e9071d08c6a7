"""
Parser for motion-vector exports.

Reads the CSV written by an extract_mvs-compatible exporter:

    framenum,source,blockw,blockh,srcx,srcy,dstx,dsty,flags[,motion_x,motion_y,motion_scale]

framenum is 1-based in output order, source < 0 means the reference lies in
the past, dst is the block centre in the current frame.
"""

from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Union

from ..core.exceptions import GrammarError, InvalidBlockSize
from ..core.models import MotionVector, Direction, VALID_BLOCK_SIZES
from ..utils.logger import get_logger

logger = get_logger(__name__)

MvMap = Dict[int, List[MotionVector]]

BASE_COLUMNS = ("framenum", "source", "blockw", "blockh", "srcx", "srcy", "dstx", "dsty", "flags")
MOTION_COLUMNS = ("motion_x", "motion_y", "motion_scale")

# Vector unit when the export lacks raw motion columns (quarter-pel)
DEFAULT_MOTION_SCALE = 4


def _to_int(value: str, line_no: int, line: str, column: str) -> int:
    text = value.strip()
    try:
        if text.lower().startswith("0x"):
            return int(text, 16)
        return int(text)
    except ValueError:
        raise GrammarError(line_no, line, f"column {column} is not an integer") from None


def parse_mv_dump(source: Union[str, Path]) -> MvMap:
    """
    Group exported motion vectors by 0-based frame index.

    Args:
        source: Path to the export, or its text

    Returns:
        frame_index -> vectors in file order (frames without vectors absent)

    Raises:
        GrammarError: Malformed record
        InvalidBlockSize: Block width/height outside {16, 8, 4}
    """
    if isinstance(source, Path):
        text = source.read_text()
    else:
        text = source

    mv_map: MvMap = defaultdict(list)
    columns = None
    total = 0

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue

        fields = [f.strip() for f in line.split(",")]
        if fields[0] == "framenum":
            if tuple(fields[:len(BASE_COLUMNS)]) != BASE_COLUMNS:
                raise GrammarError(line_no, raw_line, "unexpected header columns")
            columns = tuple(fields)
            continue

        expected = len(columns) if columns else None
        if expected is None:
            if len(fields) not in (len(BASE_COLUMNS), len(BASE_COLUMNS) + len(MOTION_COLUMNS)):
                raise GrammarError(line_no, raw_line, f"expected 9 or 12 fields, got {len(fields)}")
        elif len(fields) != expected:
            raise GrammarError(line_no, raw_line, f"expected {expected} fields, got {len(fields)}")

        values = [_to_int(f, line_no, raw_line, name) for f, name in
                  zip(fields, BASE_COLUMNS + MOTION_COLUMNS)]
        framenum, src_flag, block_w, block_h, src_x, src_y, dst_x, dst_y = values[:8]

        if framenum < 1:
            raise GrammarError(line_no, raw_line, f"frame number {framenum} < 1")
        if src_flag == 0:
            raise GrammarError(line_no, raw_line, "source must be negative (past) or positive (future)")
        if block_w not in VALID_BLOCK_SIZES or block_h not in VALID_BLOCK_SIZES:
            raise InvalidBlockSize(f"line {line_no}: block {block_w}x{block_h} is not an H.264 partition")

        if len(values) > len(BASE_COLUMNS) and values[11] != 0:
            dx, dy = values[9], values[10]
        else:
            dx = (src_x - dst_x) * DEFAULT_MOTION_SCALE
            dy = (src_y - dst_y) * DEFAULT_MOTION_SCALE

        mv_map[framenum - 1].append(MotionVector(
            dx=dx,
            dy=dy,
            direction=Direction.PAST if src_flag < 0 else Direction.FUTURE,
            block_x=dst_x - block_w // 2,
            block_y=dst_y - block_h // 2,
            block_w=block_w,
            block_h=block_h,
        ))
        total += 1

    logger.debug(f"Parsed {total} motion vectors over {len(mv_map)} frames")
    return dict(mv_map)
