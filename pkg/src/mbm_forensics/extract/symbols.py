"""
Decoder debug alphabet.

Each macroblock is printed by the decoder as a three-character cell: a type
glyph, a partition glyph and an interlace glyph.
"""

from ..core.models import MacroblockType, MacroblockKind, Partition

CELL_WIDTH = 3

TYPE_GLYPHS = {
    "i": MacroblockKind.INTRA_4X4,
    "I": MacroblockKind.INTRA_16X16,
    "S": MacroblockKind.SKIP,
    "d": MacroblockKind.SKIP,          # direct + skip (B-frames)
    "D": MacroblockKind.SKIP,          # direct
    ">": MacroblockKind.FORWARD,
    "<": MacroblockKind.BACKWARD,
    "X": MacroblockKind.BIDIRECTIONAL,
}

# Glyphs the decoder prints for types outside the list above (PCM, global
# motion, MPEG-2 intra, ...). They classify as Other but are still valid cells.
EXTRA_TYPE_GLYPHS = frozenset("APQGgF")

# Glyph meanings follow ffmpeg ff_print_debug_info2: "-" is 16x8, "|" is 8x16
PARTITION_GLYPHS = {
    " ": Partition.WHOLE_16X16,
    "?": Partition.WHOLE_16X16,        # partition unknown to the decoder
    "-": Partition.TWO_16X8,
    "|": Partition.TWO_8X16,
    "+": Partition.FOUR_8X8,
}

INTERLACE_GLYPHS = frozenset(" =")

PARTITION_GLYPH_OUT = {
    Partition.WHOLE_16X16: " ",
    Partition.TWO_16X8: "-",
    Partition.TWO_8X16: "|",
    Partition.FOUR_8X8: "+",
}


def classify_symbol(symbol: str) -> MacroblockType:
    """
    Map a debug cell (type glyph plus optional partition mark) to a type.

    Total: unknown type glyphs become Other with the glyph kept verbatim, and
    an unknown or missing partition mark means a whole macroblock.
    """
    if not symbol:
        return MacroblockType(MacroblockKind.OTHER, Partition.WHOLE_16X16, raw="")

    glyph = symbol[0]
    mark = symbol[1] if len(symbol) > 1 else " "
    partition = PARTITION_GLYPHS.get(mark, Partition.WHOLE_16X16)

    kind = TYPE_GLYPHS.get(glyph)
    if kind is None:
        return MacroblockType(MacroblockKind.OTHER, partition, raw=glyph)
    return MacroblockType(kind, partition)


def is_valid_cell(cell: str) -> bool:
    """A cell the grammar accepts: known glyph sets in all three positions."""
    if len(cell) != CELL_WIDTH:
        return False
    glyph, mark, interlace = cell
    if glyph not in TYPE_GLYPHS and glyph not in EXTRA_TYPE_GLYPHS:
        return False
    return mark in PARTITION_GLYPHS and interlace in INTERLACE_GLYPHS


def render_cell(mb_type: MacroblockType) -> str:
    """Inverse of classify_symbol for fixture generation in tests."""
    if mb_type.kind is MacroblockKind.OTHER:
        glyph = mb_type.raw or "?"
    else:
        glyph = next(g for g, k in TYPE_GLYPHS.items() if k is mb_type.kind)
    return f"{glyph}{PARTITION_GLYPH_OUT[mb_type.partition]} "
