"""
Procedural test corpus.

Every clip is rendered from a seed: a smoothed-noise texture that pans
slowly, a handful of moving shapes drawn with OpenCV, and mild sensor noise.
Raw frames are encoded once for an original clip; double and triple clips
are the result of one or two further encodes at the same settings.
"""

import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import cv2
import ffmpeg
import numpy as np
from tqdm import tqdm

from ..codec.orchestrator import encoder_options, recompress
from ..codec.tools import CodecTools
from ..core.exceptions import EncoderFailure, MbmError
from ..core.models import (
    DatasetManifest, EncodeConfig, VideoClass, resolution_tag,
)
from ..utils.logger import get_logger, TimerContext
from ..utils.threading_utils import WorkerPool
from .manifest import assign_splits, write_manifest

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.csv"


@dataclass(frozen=True)
class ClipRequest:
    video_class: VideoClass
    index: int
    width: int
    height: int
    seed: Tuple[int, ...]
    path: Path


def parse_resolution(text: str) -> Tuple[int, int]:
    """'320x240' -> (320, 240); dimensions must be even."""
    try:
        width, height = (int(v) for v in text.lower().split("x"))
    except ValueError as e:
        raise ValueError(f"resolution must look like WIDTHxHEIGHT, got {text!r}") from e
    if width < 16 or height < 16 or width % 2 or height % 2:
        raise ValueError(f"resolution {text!r} must be even and at least 16x16")
    return width, height


def _texture(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Smoothed noise, 25% larger than the frame so it can pan."""
    big_w, big_h = width + width // 4, height + height // 4
    coarse = rng.random((max(big_h // 8, 2), max(big_w // 8, 2), 3)).astype(np.float32)
    texture = cv2.resize(coarse, (big_w, big_h), interpolation=cv2.INTER_CUBIC)
    texture = cv2.GaussianBlur(texture, (0, 0), sigmaX=3.0)
    fine = rng.random((big_h, big_w, 3)).astype(np.float32)
    texture = 0.8 * texture + 0.2 * cv2.GaussianBlur(fine, (0, 0), sigmaX=1.0)
    low, high = float(texture.min()), float(texture.max())
    return (40 + 170 * (texture - low) / max(high - low, 1e-6)).astype(np.float32)


def render_clip(width: int, height: int, frames: int, seed: Sequence[int]) -> Iterator[np.ndarray]:
    """Yield `frames` BGR uint8 frames of one procedural clip."""
    rng = np.random.default_rng(list(seed))
    texture = _texture(rng, width, height)
    max_x, max_y = texture.shape[1] - width, texture.shape[0] - height
    pan = rng.uniform(-1.5, 1.5, size=2)
    origin = np.array([rng.uniform(0, max_x), rng.uniform(0, max_y)])

    scale = min(width, height)
    shapes = []
    for _ in range(int(rng.integers(3, 7))):
        shapes.append({
            "kind": "circle" if rng.random() < 0.5 else "rect",
            "pos": rng.uniform([0, 0], [width, height]),
            "vel": rng.uniform(-0.02, 0.02, size=2) * scale,
            "size": rng.uniform(0.05, 0.15) * scale,
            "color": tuple(int(c) for c in rng.integers(0, 256, size=3)),
        })

    for _ in range(frames):
        x0 = int(np.clip(origin[0], 0, max_x))
        y0 = int(np.clip(origin[1], 0, max_y))
        frame = texture[y0:y0 + height, x0:x0 + width].copy()

        for shape in shapes:
            cx, cy = (int(v) for v in shape["pos"])
            s = int(shape["size"])
            if shape["kind"] == "circle":
                cv2.circle(frame, (cx, cy), s, shape["color"], thickness=-1, lineType=cv2.LINE_AA)
            else:
                cv2.rectangle(frame, (cx - s, cy - s // 2), (cx + s, cy + s // 2), shape["color"], thickness=-1)
            shape["pos"] = shape["pos"] + shape["vel"]
            for axis, limit in ((0, width), (1, height)):
                if not 0 <= shape["pos"][axis] <= limit:
                    shape["vel"][axis] = -shape["vel"][axis]

        frame += rng.normal(0.0, 2.0, size=frame.shape).astype(np.float32)
        origin = np.clip(origin + pan, [0, 0], [max_x, max_y])
        yield np.clip(frame, 0, 255).astype(np.uint8)


def encode_raw_frames(
    frames: Iterator[np.ndarray],
    width: int,
    height: int,
    fps: int,
    config: EncodeConfig,
    dst: Path,
    tools: CodecTools,
) -> Path:
    """First encode: raw BGR frames -> H.264 file with the ladder settings."""
    dst = Path(dst)
    dst.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(suffix=".bgr", dir=dst.parent, delete=False) as raw:
        raw_path = Path(raw.name)
        for frame in frames:
            raw.write(frame.tobytes())
    try:
        args = (
            ffmpeg
            .input(str(raw_path), format="rawvideo", pix_fmt="bgr24", s=f"{width}x{height}", framerate=fps)
            .output(str(dst), **encoder_options(config))
            .global_args("-hide_banner", "-nostdin", "-loglevel", "error")
            .compile(cmd=tools.resolve(tools.codec_tool), overwrite_output=True)
        )
        tools.run(args, what=f"encode of raw frames into {dst.name}", error=EncoderFailure)
    except MbmError:
        dst.unlink(missing_ok=True)
        raise
    finally:
        raw_path.unlink(missing_ok=True)
    return dst


def _produce_clip(request: ClipRequest, frames: int, fps: int, config: EncodeConfig, tools: CodecTools) -> Path:
    scratch = Path(tempfile.mkdtemp(prefix="mbm-clip-", dir=request.path.parent))
    try:
        current = encode_raw_frames(
            render_clip(request.width, request.height, frames, request.seed),
            request.width, request.height, fps, config, scratch / "enc_1.mp4", tools,
        )
        for k in range(2, request.video_class.encode_count + 1):
            current = recompress(current, config, scratch / f"enc_{k}.mp4", tools)
        shutil.move(str(current), str(request.path))
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
    return request.path


def synthesize_corpus(
    output_dir: Path,
    counts: Dict[VideoClass, int],
    resolutions: Sequence[str] = ("320x240",),
    seed: int = 1234,
    config: Optional[EncodeConfig] = None,
    tools: Optional[CodecTools] = None,
    frames: int = 60,
    fps: int = 30,
    train_fraction: float = 0.5,
    jobs: int = 1,
    progress: bool = True,
) -> DatasetManifest:
    """
    Render, encode and label a corpus; writes `<output_dir>/manifest.csv`.

    Args:
        output_dir: Corpus root; clips go to `<class>/<WxH>/clip_NNN.mp4`
        counts: Clips per class and resolution
        resolutions: Frame sizes as 'WxH'
        seed: Master seed; every clip derives its own from it
        config: Encoder settings of every encode
        tools: External tools
        frames: Frames per clip
        fps: Frame rate of the raw stream
        train_fraction: Share of each class assigned to the train split
        jobs: Clips produced concurrently
        progress: Show a progress bar on stderr

    Raises:
        Codec errors of the first failing clip
    """
    config = config or EncodeConfig()
    tools = tools or CodecTools()
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    requests: List[ClipRequest] = []
    for res_index, text in enumerate(resolutions):
        width, height = parse_resolution(text)
        for video_class in VideoClass:
            for index in range(counts.get(video_class, 0)):
                path = output_dir / video_class.label / f"{width}x{height}" / f"clip_{index:03d}.mp4"
                path.parent.mkdir(parents=True, exist_ok=True)
                requests.append(ClipRequest(
                    video_class=video_class,
                    index=index,
                    width=width,
                    height=height,
                    seed=(seed, int(video_class), index, res_index),
                    path=path,
                ))

    logger.info(f"Synthesizing {len(requests)} clips into {output_dir}")
    with TimerContext(logger, "synthesize", clips=len(requests)) as timer, \
            tqdm(total=len(requests), desc="synthesize", unit="clip", disable=not progress) as bar:
        outcomes = WorkerPool("synthesize", jobs).map(
            lambda request: _produce_clip(request, frames, fps, config, tools),
            requests,
            on_done=lambda outcome: bar.update(1),
        )
    for request, outcome in zip(requests, outcomes):
        if not outcome.ok:
            raise outcome.error

    entries = assign_splits(
        [(r.path.resolve(), r.video_class, resolution_tag(r.width, r.height)) for r in requests],
        train_fraction=train_fraction,
        seed=seed,
    )
    manifest = DatasetManifest(
        entries=entries,
        provenance=[
            "synthesized by mbm-forensics",
            f"seed {seed}",
            f"frames {frames} fps {fps}",
            f"resolutions {' '.join(resolutions)}",
            f"encode_config {config.digest()} {tools.version()}",
        ],
        root=output_dir.resolve(),
    )
    write_manifest(manifest, output_dir / MANIFEST_NAME)
    logger.info(f"Corpus ready: {len(entries)} clips in {timer.duration_s:.1f}s")
    return manifest
