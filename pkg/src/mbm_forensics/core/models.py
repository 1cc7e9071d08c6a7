"""
Data models for MBM Forensics.

Defines the dataclasses shared by the codec orchestrator, the macroblock
extraction, the feature math and the experiment harness. Grids and modes are
immutable once built and safe to share between threads.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from enum import Enum, IntEnum
from pathlib import Path
from typing import Optional, Dict, List, Any, Tuple

from .exceptions import DimensionMismatch, FrameTypeConflict


# ============================================================================
# Enums
# ============================================================================

class FrameType(Enum):
    """Picture types reported by the decoder."""
    I = "I"
    P = "P"
    B = "B"


class MacroblockKind(Enum):
    """Macroblock classes of the decoder's debug alphabet."""
    INTRA_4X4 = "Intra4x4"
    INTRA_16X16 = "Intra16x16"
    SKIP = "Skip"
    FORWARD = "ForwardPred"           # reference to a past frame
    BACKWARD = "BackwardPred"         # reference to a future frame
    BIDIRECTIONAL = "Bidirectional"   # past and future
    OTHER = "Other"                   # unrecognized glyph, kept verbatim


class Partition(Enum):
    """Macroblock partition layouts (width x height of each part)."""
    WHOLE_16X16 = "Whole16x16"
    TWO_16X8 = "Two16x8"
    TWO_8X16 = "Two8x16"
    FOUR_8X8 = "Four8x8"


class Direction(Enum):
    """Reference direction of a motion vector."""
    PAST = "past"
    FUTURE = "future"

    @property
    def order(self) -> int:
        return 0 if self is Direction.PAST else 1


class VideoClass(IntEnum):
    """Ground-truth compression history of a corpus clip."""
    ORIGINAL = 0
    DOUBLE = 1
    TRIPLE = 2

    @property
    def label(self) -> str:
        return {0: "original", 1: "double", 2: "triple"}[int(self)]

    @classmethod
    def from_label(cls, text: str) -> "VideoClass":
        normalized = text.strip().lower()
        aliases = {
            "original": cls.ORIGINAL, "0": cls.ORIGINAL,
            "double": cls.DOUBLE, "doublecompressed": cls.DOUBLE, "1": cls.DOUBLE,
            "triple": cls.TRIPLE, "triplecompressed": cls.TRIPLE, "2": cls.TRIPLE,
        }
        if normalized not in aliases:
            raise ValueError(f"Unknown video class: {text!r}")
        return aliases[normalized]

    @property
    def encode_count(self) -> int:
        """Number of encodes from raw frames that produce this class."""
        return int(self) + 1


# Verdict names used for the binary (original vs recompressed) experiment
BINARY_LABELS = {0: "original", 1: "recompressed"}
MULTICLASS_LABELS = {0: "original", 1: "double", 2: "triple"}

INTRA_KINDS = frozenset({MacroblockKind.INTRA_4X4, MacroblockKind.INTRA_16X16})
MOTIONLESS_KINDS = INTRA_KINDS | {MacroblockKind.SKIP}

VALID_BLOCK_SIZES = (16, 8, 4)
MB_SIZE = 16

RESOLUTION_TAGS = {
    (720, 480): "720x480",
    (480, 720): "720x480",
    (720, 1280): "720x1280",
    (1280, 720): "720x1280",
    (1920, 1080): "1920x1080",
    (1080, 1920): "1920x1080",
    (3840, 2160): "4K",
    (2160, 3840): "4K",
}
VALID_RESOLUTION_TAGS = ("720x480", "720x1280", "1920x1080", "4K", "other")


def resolution_tag(width: int, height: int) -> str:
    """Map a frame size onto the dataset's resolution classes."""
    return RESOLUTION_TAGS.get((width, height), "other")


def grid_shape(width: int, height: int) -> Tuple[int, int]:
    """(rows, cols) of the macroblock grid; edge macroblocks count as whole cells."""
    return math.ceil(height / MB_SIZE), math.ceil(width / MB_SIZE)


# ============================================================================
# Codec-side models
# ============================================================================

@dataclass(frozen=True)
class VideoInfo:
    """Probed properties of a video file."""
    path: Path
    width: int
    height: int
    frame_count: int                   # counted by decoding, not from metadata
    frame_rate: float
    codec_name: str

    @property
    def is_h264(self) -> bool:
        return self.codec_name.lower() in ("h264", "avc", "avc1")

    @property
    def resolution_tag(self) -> str:
        return resolution_tag(self.width, self.height)


@dataclass(frozen=True)
class EncodeConfig:
    """Encoder settings shared by every generation of one ladder."""
    quality_scale: int = 23            # CRF or QP value, constant across the ladder
    gop_length: int = 12
    b_frames: int = 2
    preset: str = "medium"
    rate_control: str = "crf"          # crf | qp
    encoder_threads: int = 1           # >1 trades determinism for speed

    def __post_init__(self):
        if self.rate_control not in ("crf", "qp"):
            raise ValueError(f"rate_control must be 'crf' or 'qp', got {self.rate_control!r}")
        if not 0 <= self.quality_scale <= 51:
            raise ValueError(f"quality_scale must be in [0, 51], got {self.quality_scale}")
        if self.gop_length < 1:
            raise ValueError(f"gop_length must be >= 1, got {self.gop_length}")
        if self.b_frames < 0:
            raise ValueError(f"b_frames must be >= 0, got {self.b_frames}")
        if self.encoder_threads < 1:
            raise ValueError(f"encoder_threads must be >= 1, got {self.encoder_threads}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EncodeConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class Generation:
    """One rung of a recompression ladder."""
    index: int                         # 0 = the suspect video itself
    video_path: Path
    mb_debug_path: Path
    mv_dump_path: Path
    grid_path: Optional[Path] = None   # canonical grid cache


@dataclass
class RecompressionLadder:
    """Suspect video followed by n successive re-encodes at one EncodeConfig."""
    generations: List[Generation]
    config: EncodeConfig
    tool_version: str
    directory: Path
    source: Path
    width: int = 0
    height: int = 0
    frame_count: int = 0

    @property
    def n(self) -> int:
        """Number of feature entries this ladder supports."""
        return len(self.generations) - 1


# ============================================================================
# Macroblock models
# ============================================================================

@dataclass(frozen=True)
class MacroblockType:
    """Type glyph and partition layout of one macroblock."""
    kind: MacroblockKind
    partition: Partition = Partition.WHOLE_16X16
    raw: str = ""                      # original glyph, only kept for OTHER

    @property
    def is_intra(self) -> bool:
        return self.kind in INTRA_KINDS

    @property
    def is_skip(self) -> bool:
        return self.kind is MacroblockKind.SKIP

    @property
    def carries_motion(self) -> bool:
        """Skipped and intra macroblocks do not take part in vector comparison."""
        return self.kind not in MOTIONLESS_KINDS

    @property
    def token(self) -> str:
        if self.kind is MacroblockKind.OTHER:
            return f"Other:{self.raw}"
        return self.kind.value


@dataclass(frozen=True)
class MotionVector:
    """One exported block vector, in the decoder's raw integer units."""
    dx: int
    dy: int
    direction: Direction
    block_x: int
    block_y: int
    block_w: int = 16
    block_h: int = 16

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (self.block_y, self.block_x, self.direction.order)


@dataclass(frozen=True, eq=False)
class MacroblockMode:
    """
    The (type, motion) pair of one macroblock.

    Equality is macroblock-mode equality: types must match and, unless the
    macroblock is skipped or intra, the canonical vector lists must match too.
    """
    mb_type: MacroblockType
    mvs: Tuple[MotionVector, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.mvs, key=lambda mv: mv.sort_key))
        object.__setattr__(self, "mvs", ordered)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MacroblockMode):
            return NotImplemented
        if self is other:
            return True
        if self.mb_type != other.mb_type:
            return False
        if not self.mb_type.carries_motion:
            return True
        return self.mvs == other.mvs

    def __hash__(self) -> int:
        if self.mb_type.carries_motion:
            return hash((self.mb_type, self.mvs))
        return hash(self.mb_type)


@dataclass(frozen=True)
class FrameGrid:
    """Macroblock modes of one decoded frame (rows x cols)."""
    frame_index: int
    frame_type: FrameType
    rows: int
    cols: int
    cells: Tuple[Tuple[MacroblockMode, ...], ...]

    def __post_init__(self):
        if len(self.cells) != self.rows or any(len(row) != self.cols for row in self.cells):
            raise DimensionMismatch(
                f"frame {self.frame_index}: cells are not {self.rows}x{self.cols}"
            )
        if self.frame_type is FrameType.I:
            for row in self.cells:
                for mode in row:
                    if mode.mb_type.kind not in INTRA_KINDS and mode.mb_type.kind is not MacroblockKind.OTHER:
                        raise FrameTypeConflict(
                            f"frame {self.frame_index} is an I-frame but holds a "
                            f"{mode.mb_type.kind.value} macroblock"
                        )

    def cell(self, row: int, col: int) -> MacroblockMode:
        return self.cells[row][col]

    @property
    def vector_count(self) -> int:
        return sum(len(mode.mvs) for row in self.cells for mode in row)


# ============================================================================
# Feature / dataset models
# ============================================================================

@dataclass(frozen=True)
class FeatureVector:
    """Average unstable P-frame macroblocks per ladder step: (v_0, ..., v_{n-1})."""
    values: Tuple[float, ...]
    scaled: bool = False
    label: Optional[int] = None
    source: str = ""                   # video path the vector was extracted from

    @property
    def n(self) -> int:
        return len(self.values)

    def with_label(self, label: Optional[int]) -> "FeatureVector":
        return FeatureVector(values=self.values, scaled=self.scaled, label=label, source=self.source)


@dataclass(frozen=True)
class DatasetEntry:
    """One manifest row."""
    path: Path
    video_class: VideoClass
    resolution: str
    split: str                         # train | predict


@dataclass
class DatasetManifest:
    """Corpus description: entries plus free-form provenance notes."""
    entries: List[DatasetEntry]
    provenance: List[str] = field(default_factory=list)
    root: Optional[Path] = None

    def split(self, name: str) -> List[DatasetEntry]:
        return [e for e in self.entries if e.split == name]

    def filter_resolution(self, tag: Optional[str]) -> "DatasetManifest":
        if tag is None or tag.upper() == "MIX":
            return self
        return DatasetManifest(
            entries=[e for e in self.entries if e.resolution == tag],
            provenance=list(self.provenance),
            root=self.root,
        )


@dataclass
class EvaluationReport:
    """Outcome of one train/predict experiment."""
    classes: List[int]
    class_names: List[str]
    confusion: List[List[int]]         # rows = true class, cols = predicted
    accuracy: float
    recalls: Dict[str, float]
    config: Dict[str, Any]
    timings: Dict[str, float] = field(default_factory=dict)
    resources: Dict[str, Any] = field(default_factory=dict)
    predictions: List[Tuple[str, int, int]] = field(default_factory=list)
    excluded: List[str] = field(default_factory=list)
    chance_p_value: Optional[float] = None

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.confusion)

    @property
    def correct(self) -> int:
        return sum(self.confusion[i][i] for i in range(len(self.confusion)))
