"""External codec orchestration: probing, recompression ladders, dumps."""

from .tools import CodecTools
from .orchestrator import (
    probe_video,
    recompress,
    dump_mb_debug,
    dump_motion_vectors,
    build_ladder,
    load_ladder,
    load_generation_grids,
    ladder_feature_vector,
    discard_ladder,
)

__all__ = [
    "CodecTools",
    "probe_video",
    "recompress",
    "dump_mb_debug",
    "dump_motion_vectors",
    "build_ladder",
    "load_ladder",
    "load_generation_grids",
    "ladder_feature_vector",
    "discard_ladder",
]
