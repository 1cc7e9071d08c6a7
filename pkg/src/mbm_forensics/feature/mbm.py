"""
Macroblock-mode stability features.

A macroblock position is stable between two generations when its mode
(type plus motion) is unchanged. v_i is the number of unstable macroblocks
per P-frame between generation i and i+1; the feature vector stacks v_0
through v_{n-1}.
"""

from typing import Sequence, List, Callable, Optional

import numpy as np

from ..core.exceptions import FrameCountMismatch, DimensionMismatch, NoPFrames
from ..core.models import FrameGrid, FrameType, MacroblockMode, FeatureVector
from ..utils.logger import get_logger

logger = get_logger(__name__)

GridLoader = Callable[[int], Sequence[FrameGrid]]


def mbm_equal(a: MacroblockMode, b: MacroblockMode) -> bool:
    """Types equal and, unless skipped or intra, identical vector lists."""
    return a == b


def indicator(a: MacroblockMode, b: MacroblockMode) -> int:
    """0 for a stable macroblock, 1 for an unstable one."""
    return 0 if mbm_equal(a, b) else 1


def unstable_count(frame_a: FrameGrid, frame_b: FrameGrid) -> int:
    if frame_a.rows != frame_b.rows or frame_a.cols != frame_b.cols:
        raise DimensionMismatch(
            f"frame {frame_a.frame_index}: {frame_a.rows}x{frame_a.cols} vs "
            f"{frame_b.rows}x{frame_b.cols}"
        )
    return sum(
        indicator(a, b)
        for row_a, row_b in zip(frame_a.cells, frame_b.cells)
        for a, b in zip(row_a, row_b)
    )


def compute_vi(gen_a: Sequence[FrameGrid], gen_b: Sequence[FrameGrid]) -> float:
    """
    Average unstable macroblocks per P-frame between two generations.

    Frames are paired by index. Only frames that are P-frames in gen_a
    count; a frame re-encoded as another type still compares its cells.

    Raises:
        FrameCountMismatch: Generations differ in frame count
        DimensionMismatch: Grids differ in size
        NoPFrames: gen_a has no P-frame
    """
    if len(gen_a) != len(gen_b):
        raise FrameCountMismatch(f"generations hold {len(gen_a)} and {len(gen_b)} frames")

    p_frames = 0
    unstable = 0
    for frame_a, frame_b in zip(gen_a, gen_b):
        if frame_a.frame_type is not FrameType.P:
            continue
        p_frames += 1
        unstable += unstable_count(frame_a, frame_b)

    if p_frames == 0:
        raise NoPFrames("the earlier generation contains no P-frames")
    return unstable / p_frames


def compute_feature_vector(
    generations: Sequence[Sequence[FrameGrid]],
    n: int,
    source: str = "",
    label: Optional[int] = None,
) -> FeatureVector:
    """
    values[i] = compute_vi(generation i, generation i+1) for i < n.

    Args:
        generations: Grids per ladder generation, generation 0 first
        n: Feature length
        source: Video path recorded on the vector
        label: Optional class label
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(generations) < n + 1:
        raise ValueError(f"{n} features need {n + 1} generations, got {len(generations)}")

    values = tuple(compute_vi(generations[i], generations[i + 1]) for i in range(n))
    logger.debug(f"Feature vector {source or '<grids>'}: {values}")
    return FeatureVector(values=values, label=label, source=source)


def compute_feature_vector_lazy(load: GridLoader, n: int, source: str = "") -> FeatureVector:
    """Like compute_feature_vector, holding at most two generations in memory."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    values: List[float] = []
    previous = load(0)
    for i in range(n):
        current = load(i + 1)
        values.append(compute_vi(previous, current))
        previous = current
    return FeatureVector(values=tuple(values), source=source)


def decay_curve(features: Sequence[FeatureVector]) -> List[float]:
    """Mean v_k over many clips, one entry per k."""
    if not features:
        return []
    lengths = {fv.n for fv in features}
    if len(lengths) != 1:
        raise ValueError(f"feature vectors of mixed length {sorted(lengths)}")
    matrix = np.array([fv.values for fv in features], dtype=np.float64)
    return [float(v) for v in matrix.mean(axis=0)]
