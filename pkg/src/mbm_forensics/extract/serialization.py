"""
Canonical text form of merged grids, used for golden fixtures and the
per-generation grid cache.

    frame <index> <type> <rows>x<cols>
    <r> <c> <kind> <partition> [<dx>,<dy>,<dir>,<x>,<y>,<w>,<h> ...]
"""

import re
from pathlib import Path
from typing import Iterable, List, Optional

from ..core.exceptions import GrammarError
from ..core.models import (
    FrameGrid, FrameType, MacroblockKind, MacroblockMode, MacroblockType,
    MotionVector, Partition, Direction,
)

_HEADER = re.compile(r"^frame (\d+) ([IPB]) (\d+)x(\d+)$")
_KINDS = {kind.value: kind for kind in MacroblockKind}
_PARTITIONS = {p.value: p for p in Partition}
_DIRECTIONS = {d.value: d for d in Direction}


def _format_mv(mv: MotionVector) -> str:
    return (f"{mv.dx},{mv.dy},{mv.direction.value},"
            f"{mv.block_x},{mv.block_y},{mv.block_w},{mv.block_h}")


def serialize_grids(grids: Iterable[FrameGrid]) -> str:
    lines: List[str] = []
    for grid in grids:
        lines.append(f"frame {grid.frame_index} {grid.frame_type.value} {grid.rows}x{grid.cols}")
        for r, row in enumerate(grid.cells):
            for c, mode in enumerate(row):
                parts = [str(r), str(c), mode.mb_type.token, mode.mb_type.partition.value]
                parts.extend(_format_mv(mv) for mv in mode.mvs)
                lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_kind(token: str, line_no: int, line: str) -> MacroblockType:
    if token.startswith("Other:"):
        return MacroblockType(MacroblockKind.OTHER, raw=token[len("Other:"):])
    kind = _KINDS.get(token)
    if kind is None or kind is MacroblockKind.OTHER:
        raise GrammarError(line_no, line, f"unknown macroblock kind {token!r}")
    return MacroblockType(kind)


def _parse_mv(token: str, line_no: int, line: str) -> MotionVector:
    fields = token.split(",")
    if len(fields) != 7 or fields[2] not in _DIRECTIONS:
        raise GrammarError(line_no, line, f"bad vector {token!r}")
    try:
        dx, dy, x, y, w, h = (int(fields[i]) for i in (0, 1, 3, 4, 5, 6))
    except ValueError:
        raise GrammarError(line_no, line, f"bad vector {token!r}") from None
    return MotionVector(dx, dy, _DIRECTIONS[fields[2]], x, y, w, h)


def parse_grids(text: str) -> List[FrameGrid]:
    """Inverse of serialize_grids."""
    grids: List[FrameGrid] = []
    header: Optional[tuple] = None
    cells: List[List[Optional[MacroblockMode]]] = []

    def finish():
        if header is None:
            return
        index, frame_type, rows, cols, line_no = header
        if any(mode is None for row in cells for mode in row):
            raise GrammarError(line_no, f"frame {index}", "frame is missing cells")
        grids.append(FrameGrid(index, frame_type, rows, cols, tuple(tuple(row) for row in cells)))

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        match = _HEADER.match(line)
        if match:
            finish()
            rows, cols = int(match.group(3)), int(match.group(4))
            header = (int(match.group(1)), FrameType(match.group(2)), rows, cols, line_no)
            cells = [[None] * cols for _ in range(rows)]
            continue

        if header is None:
            raise GrammarError(line_no, line, "cell line before any frame header")
        tokens = line.split(" ")
        if len(tokens) < 4:
            raise GrammarError(line_no, line, "cell line needs row, column, kind and partition")
        try:
            r, c = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GrammarError(line_no, line, "bad cell coordinates") from None
        if not (0 <= r < header[2] and 0 <= c < header[3]):
            raise GrammarError(line_no, line, "cell outside the frame")
        if tokens[3] not in _PARTITIONS:
            raise GrammarError(line_no, line, f"unknown partition {tokens[3]!r}")
        kind = _parse_kind(tokens[2], line_no, line)
        mb_type = MacroblockType(kind.kind, _PARTITIONS[tokens[3]], kind.raw)
        mvs = tuple(_parse_mv(tok, line_no, line) for tok in tokens[4:])
        cells[r][c] = MacroblockMode(mb_type, mvs)

    finish()
    return grids


def write_grids(grids: Iterable[FrameGrid], path: Path) -> Path:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(serialize_grids(grids))
    tmp.replace(path)
    return path


def read_grids(path: Path) -> List[FrameGrid]:
    return parse_grids(Path(path).read_text())
