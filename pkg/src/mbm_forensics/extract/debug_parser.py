"""
Parser for the decoder's macroblock-type debug stream.

The decoder prints, for every output frame, a header line followed by one
line per macroblock row:

    [h264 @ 0x55d0c4a8e2c0] New frame, type: P
    [h264 @ 0x55d0c4a8e2c0] S  S  >- i  ...

Everything else the decoder logs (stream setup, NAL notices, progress) is
informational and skipped.
"""

import re
from typing import List, NamedTuple, Optional, Tuple

from ..core.exceptions import GrammarError, DimensionMismatch
from ..core.models import FrameType, MacroblockType
from ..utils.logger import get_logger
from .symbols import CELL_WIDTH, classify_symbol, is_valid_cell

logger = get_logger(__name__)

_CONTEXT_PREFIX = re.compile(r"^\[[^\]]*\] ?")
_FRAME_HEADER = re.compile(r"^New frame, type: (?P<type>\S)\s*$")

_PICTURE_TYPES = {
    "I": FrameType.I,
    "i": FrameType.I,     # SI
    "P": FrameType.P,
    "p": FrameType.P,     # SP
    "S": FrameType.P,     # S(GMC)-VOP
    "B": FrameType.B,
    "b": FrameType.B,     # BI
}

TypeMatrix = Tuple[Tuple[MacroblockType, ...], ...]


class ParsedFrame(NamedTuple):
    """One frame of the debug stream, before motion vectors are attached."""
    frame_index: int
    frame_type: Optional[FrameType]    # None when the stream has no headers
    types: TypeMatrix
    line_no: int

    @property
    def rows(self) -> int:
        return len(self.types)

    @property
    def cols(self) -> int:
        return len(self.types[0]) if self.types else 0


def _body(line: str) -> str:
    return _CONTEXT_PREFIX.sub("", line, count=1)


def _split_cells(body: str) -> List[str]:
    text = body.rstrip()
    if len(text) % CELL_WIDTH:
        text += " " * (CELL_WIDTH - len(text) % CELL_WIDTH)
    return [text[i:i + CELL_WIDTH] for i in range(0, len(text), CELL_WIDTH)]


def _looks_like_row(body: str) -> bool:
    cells = _split_cells(body)
    return bool(cells) and is_valid_cell(cells[0])


def _parse_row(body: str, line_no: int, line: str) -> Tuple[MacroblockType, ...]:
    cells = _split_cells(body)
    for col, cell in enumerate(cells):
        if not is_valid_cell(cell):
            raise GrammarError(line_no, line, f"invalid macroblock cell {cell!r} at column {col}")
    return tuple(classify_symbol(cell) for cell in cells)


class _Block:
    __slots__ = ("frame_type", "line_no", "rows")

    def __init__(self, frame_type: Optional[FrameType], line_no: int):
        self.frame_type = frame_type
        self.line_no = line_no
        self.rows: List[Tuple[MacroblockType, ...]] = []


def parse_debug_stream(text: str, rows: Optional[int] = None) -> List[ParsedFrame]:
    """
    Parse a captured debug stream into per-frame type matrices.

    Args:
        text: Debug text as captured from the decoder's stderr
        rows: Macroblock rows per frame. Required for streams without frame
            headers; checked against every frame when headers are present.

    Returns:
        One ParsedFrame per decoded frame, in the decoder's output order

    Raises:
        GrammarError: A row with an invalid cell, a header with no rows, a
            block cut short by another line, or a row outside any frame
            block in a headered stream
        DimensionMismatch: A frame whose matrix differs from the first frame's
    """
    frames: List[ParsedFrame] = []
    block: Optional[_Block] = None
    loose_rows: List[Tuple[MacroblockType, ...]] = []
    loose_start = 0
    shape: Optional[Tuple[int, int]] = None

    def emit(frame_type: Optional[FrameType], matrix: List[Tuple[MacroblockType, ...]], line_no: int):
        nonlocal shape
        widths = {len(r) for r in matrix}
        if len(widths) != 1:
            raise DimensionMismatch(
                f"frame {len(frames)} (line {line_no}): rows of unequal width {sorted(widths)}"
            )
        frame_shape = (len(matrix), widths.pop())
        if shape is None:
            shape = frame_shape
        elif frame_shape != shape:
            raise DimensionMismatch(
                f"frame {len(frames)} (line {line_no}) is {frame_shape[0]}x{frame_shape[1]}, "
                f"first frame was {shape[0]}x{shape[1]}"
            )
        if rows is not None and frame_shape[0] != rows:
            raise DimensionMismatch(
                f"frame {len(frames)} (line {line_no}) has {frame_shape[0]} rows, expected {rows}"
            )
        frames.append(ParsedFrame(len(frames), frame_type, tuple(matrix), line_no))

    def close_block():
        nonlocal block
        if block is not None:
            if not block.rows:
                raise GrammarError(block.line_no, "New frame", "frame header without macroblock rows")
            emit(block.frame_type, block.rows, block.line_no)
            block = None

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.rstrip("\r\n")
        body = _body(line)

        header = _FRAME_HEADER.match(body)
        if header:
            close_block()
            glyph = header.group("type")
            frame_type = _PICTURE_TYPES.get(glyph)
            if frame_type is None:
                logger.debug(f"line {line_no}: unknown picture type {glyph!r}, inferring later")
            block = _Block(frame_type, line_no)
            continue

        if block is not None:
            if _looks_like_row(body):
                block.rows.append(_parse_row(body, line_no, line))
                continue
            if not block.rows:
                raise GrammarError(line_no, line, "expected a macroblock row after the frame header")
            expected = rows if rows is not None else (shape[0] if shape is not None else None)
            if expected is not None and len(block.rows) < expected:
                raise GrammarError(
                    line_no, line, f"frame block interrupted after {len(block.rows)} of {expected} rows"
                )
            close_block()
            continue

        if body.strip() and _looks_like_row(body):
            if rows is None:
                raise GrammarError(line_no, line, "macroblock row outside a frame block")
            if not loose_rows:
                loose_start = line_no
            loose_rows.append(_parse_row(body, line_no, line))
            if len(loose_rows) == rows:
                emit(None, loose_rows, loose_start)
                loose_rows = []

    close_block()
    if loose_rows:
        raise DimensionMismatch(
            f"stream ends with {len(loose_rows)} rows, not a multiple of {rows} (from line {loose_start})"
        )

    logger.debug(f"Parsed {len(frames)} frames from debug stream")
    return frames
