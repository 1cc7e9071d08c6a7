"""
Test suite for the macroblock-type debug stream parser.
"""

import pytest

from mbm_forensics.core.exceptions import DimensionMismatch, GrammarError
from mbm_forensics.core.models import FrameType, MacroblockKind, Partition
from mbm_forensics.extract.debug_parser import parse_debug_stream


def test_golden_stream(debug_text):
    """Two 15x20 frames, I then P, located at their header lines."""
    frames = parse_debug_stream(debug_text)

    assert len(frames) == 2
    assert [f.frame_type for f in frames] == [FrameType.I, FrameType.P]
    assert [f.frame_index for f in frames] == [0, 1]
    assert [f.line_no for f in frames] == [15, 32]
    assert all((f.rows, f.cols) == (15, 20) for f in frames)


def test_golden_stream_cells(debug_text):
    """Intra pattern of the I-frame and the inter cells of the P-frame."""
    i_frame, p_frame = parse_debug_stream(debug_text)

    for r in range(15):
        for c in range(20):
            expected = MacroblockKind.INTRA_16X16 if (r + c) % 3 == 0 else MacroblockKind.INTRA_4X4
            assert i_frame.types[r][c].kind is expected

    assert p_frame.types[2][3].kind is MacroblockKind.FORWARD
    assert p_frame.types[2][3].partition is Partition.WHOLE_16X16
    assert p_frame.types[5][10].partition is Partition.TWO_16X8
    assert p_frame.types[9][15].partition is Partition.FOUR_8X8
    assert p_frame.types[4][5].kind is MacroblockKind.INTRA_4X4
    assert p_frame.types[1][1].kind is MacroblockKind.SKIP
    print(f"✓ {sum(t.carries_motion for row in p_frame.types for t in row)} inter cells")


def test_empty_stream():
    """No frame data gives no frames."""
    assert parse_debug_stream("") == []
    assert parse_debug_stream("ffmpeg version 6.1.1\nStream mapping:\n") == []


def test_invalid_cell_reports_its_line(debug_text):
    """A bad glyph inside a row fails with the row's line number."""
    lines = debug_text.splitlines()
    assert ">- " in lines[37]
    lines[37] = lines[37].replace(">- ", "%  ")

    with pytest.raises(GrammarError) as excinfo:
        parse_debug_stream("\n".join(lines))
    assert excinfo.value.line_no == 38


def test_headerless_stream_needs_rows(debug_text):
    """Without headers, rows are grouped into frames by the given row count."""
    text = "\n".join(line for line in debug_text.splitlines() if "New frame" not in line)

    frames = parse_debug_stream(text, rows=15)
    assert len(frames) == 2
    assert all(f.frame_type is None for f in frames)
    assert frames[1].types[2][3].kind is MacroblockKind.FORWARD

    with pytest.raises(GrammarError):
        parse_debug_stream(text)


def test_header_without_rows():
    """A frame header followed by anything but rows is a grammar error."""
    with pytest.raises(GrammarError) as excinfo:
        parse_debug_stream("[h264 @ 0x1] New frame, type: P\n[h264 @ 0x1] nal_unit_type: 1\n")
    assert excinfo.value.line_no == 2

    with pytest.raises(GrammarError) as excinfo:
        parse_debug_stream("[h264 @ 0x1] New frame, type: P\n")
    assert excinfo.value.line_no == 1


def test_frames_of_different_size():
    """Every frame must have the first frame's shape."""
    text = "\n".join([
        "New frame, type: I",
        "i  i  ",
        "New frame, type: P",
        "S  S  S  ",
    ])
    with pytest.raises(DimensionMismatch):
        parse_debug_stream(text)


def test_expected_rows_checked():
    """A row count given with a headered stream is enforced."""
    text = "New frame, type: I\ni  i  \ni  i  \n"
    assert len(parse_debug_stream(text, rows=2)) == 1
    with pytest.raises(DimensionMismatch):
        parse_debug_stream(text, rows=3)


def test_unknown_picture_type_left_for_inference():
    """Headers with an unknown picture type yield frame_type None."""
    frames = parse_debug_stream("New frame, type: ?\ni  I  \n")
    assert frames[0].frame_type is None


def test_log_line_inside_a_frame_block():
    """A log line that cuts a frame short is an error, not a shorter frame."""
    text = "\n".join([
        "New frame, type: I",
        "i  i  ",
        "i  i  ",
        "New frame, type: P",
        "S  S  ",
        "[h264 @ 0x1] concealing 2 DC errors",
        "S  S  ",
    ])
    with pytest.raises(GrammarError) as excinfo:
        parse_debug_stream(text)
    assert excinfo.value.line_no == 6
    assert "1 of 2 rows" in excinfo.value.reason

    with pytest.raises(GrammarError):
        parse_debug_stream("New frame, type: I\ni  i  \nconcealing\n", rows=2)

    complete = "\n".join(["New frame, type: P", "S  S  ", "S  S  ", "[h264 @ 0x1] concealing 2 DC errors"])
    assert len(parse_debug_stream(complete)) == 1
