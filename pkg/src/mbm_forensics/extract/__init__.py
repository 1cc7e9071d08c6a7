"""Macroblock type and motion-vector extraction."""

from .symbols import classify_symbol
from .debug_parser import parse_debug_stream, ParsedFrame
from .mv_parser import parse_mv_dump
from .merge import merge_mb_and_mv, merge_with_stats, MergeStats
from .serialization import serialize_grids, parse_grids, write_grids, read_grids

__all__ = [
    "classify_symbol",
    "parse_debug_stream",
    "ParsedFrame",
    "parse_mv_dump",
    "merge_mb_and_mv",
    "merge_with_stats",
    "MergeStats",
    "serialize_grids",
    "parse_grids",
    "write_grids",
    "read_grids",
]
