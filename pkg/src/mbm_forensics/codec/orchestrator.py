"""
Codec orchestration: probing, re-encoding and per-generation dumps.

A recompression ladder lives in one directory:

    ladder.yaml          tool version, encoder settings, generation files
    gen_00.mbdebug.txt   generation 0 is the suspect video itself
    gen_00.mvs.csv
    gen_01.mp4           re-encode of generation 0
    gen_01.mbdebug.txt
    ...
    gen_NN.grid.txt      merged grid cache, written on first use
"""

import shutil
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Optional, List

import ffmpeg
import yaml

from ..core.exceptions import (
    VideoNotFound, NotAVideo, UnsupportedCodec, EncoderFailure, DecoderFailure,
    EmptyDebugOutput, FrameCountMismatch, ToolVersionMismatch, MbmError,
)
from ..core.models import (
    VideoInfo, EncodeConfig, Generation, RecompressionLadder, FrameGrid, FeatureVector,
)
from ..extract.debug_parser import parse_debug_stream
from ..extract.mv_parser import parse_mv_dump
from ..extract.merge import merge_with_stats
from ..extract.serialization import read_grids, write_grids
from ..feature.mbm import compute_feature_vector_lazy
from ..utils.error_handler import handle_error
from ..utils.logger import get_logger, TimerContext
from .tools import CodecTools

logger = get_logger(__name__)

LADDER_FILE = "ladder.yaml"
DEBUG_MARKER = b"New frame, type:"


def _generation_stem(index: int) -> str:
    return f"gen_{index:02d}"


def _frame_rate(stream: dict) -> float:
    for key in ("avg_frame_rate", "r_frame_rate"):
        text = stream.get(key) or ""
        try:
            rate = Fraction(text)
        except (ValueError, ZeroDivisionError):
            continue
        if rate > 0:
            return float(rate)
    return 0.0


@handle_error("orchestrator", "probe_video")
def probe_video(path: Path, tools: Optional[CodecTools] = None) -> VideoInfo:
    """
    Probe a video, counting frames by decoding.

    Raises:
        VideoNotFound: No such file
        NotAVideo: The demuxer rejects the file or it has no video stream
        UnsupportedCodec: The video stream is not H.264
    """
    tools = tools or CodecTools()
    path = Path(path)
    if not path.is_file():
        raise VideoNotFound(f"video not found: {path}")

    try:
        probe = ffmpeg.probe(
            str(path),
            cmd=tools.resolve(tools.probe_tool),
            count_frames=None,
            select_streams="v:0",
        )
    except ffmpeg.Error as e:
        stderr = e.stderr.decode(errors="replace") if e.stderr else ""
        tail = stderr.strip().splitlines()[-1:] if stderr else []
        raise NotAVideo(f"{path}: not a readable video{': ' + tail[0] if tail else ''}") from e

    streams = [s for s in probe.get("streams", []) if s.get("codec_type") == "video"]
    if not streams:
        raise NotAVideo(f"{path}: no video stream")
    stream = streams[0]

    codec_name = stream.get("codec_name", "")
    if codec_name != tools.decoder_name:
        raise UnsupportedCodec(f"{path}: video codec is {codec_name or 'unknown'}, need {tools.decoder_name}")

    frame_count = int(stream.get("nb_read_frames") or 0)
    width, height = int(stream.get("width") or 0), int(stream.get("height") or 0)
    if frame_count <= 0 or width <= 0 or height <= 0:
        raise NotAVideo(f"{path}: no decodable frames")

    info = VideoInfo(
        path=path,
        width=width,
        height=height,
        frame_count=frame_count,
        frame_rate=_frame_rate(stream),
        codec_name=codec_name,
    )
    logger.debug(f"Probed {path.name}: {width}x{height}, {frame_count} frames, {codec_name}")
    return info


def encoder_options(config: EncodeConfig) -> dict:
    """Output options of one ladder re-encode."""
    options = {
        "vcodec": "libx264",
        config.rate_control: config.quality_scale,
        "g": config.gop_length,
        "keyint_min": config.gop_length,
        "sc_threshold": 0,
        "bf": config.b_frames,
        "preset": config.preset,
        "threads": config.encoder_threads,
        "pix_fmt": "yuv420p",
        "an": None,
        "map_metadata": -1,
        "fflags": "+bitexact",
        "flags:v": "+bitexact",
    }
    return options


@handle_error("orchestrator", "recompress")
def recompress(src: Path, config: EncodeConfig, dst: Path, tools: Optional[CodecTools] = None) -> Path:
    """
    Re-encode src into dst with the ladder settings; frame count must survive.

    Raises:
        EncoderFailure: The encoder exited nonzero
        FrameCountMismatch: dst decodes to a different number of frames
    """
    tools = tools or CodecTools()
    src, dst = Path(src), Path(dst)
    source_info = probe_video(src, tools)
    dst.parent.mkdir(parents=True, exist_ok=True)

    args = (
        ffmpeg
        .input(str(src))
        .output(str(dst), **encoder_options(config))
        .global_args("-hide_banner", "-nostdin", "-loglevel", "error")
        .compile(cmd=tools.resolve(tools.codec_tool), overwrite_output=True)
    )
    try:
        tools.run(args, what=f"re-encode of {src.name}", error=EncoderFailure)
        output_info = probe_video(dst, tools)
    except MbmError:
        dst.unlink(missing_ok=True)
        raise

    if output_info.frame_count != source_info.frame_count:
        dst.unlink(missing_ok=True)
        raise FrameCountMismatch(
            f"re-encode of {src.name} produced {output_info.frame_count} frames, "
            f"source has {source_info.frame_count}"
        )
    return dst


@handle_error("orchestrator", "dump_mb_debug")
def dump_mb_debug(video: Path, dst: Path, tools: Optional[CodecTools] = None) -> Path:
    """
    Capture the decoder's macroblock-type debug stream into dst.

    Raises:
        DecoderFailure: The decoder exited nonzero
        EmptyDebugOutput: The decoder printed no frame matrices
    """
    tools = tools or CodecTools()
    dst = Path(dst)
    args = (
        ffmpeg
        .input(str(video), threads=1, debug="mb_type")
        .output("-", format="null")
        .global_args("-nostdin", "-loglevel", "debug")
        .compile(cmd=tools.resolve(tools.codec_tool))
    )
    with open(dst, "wb") as stream:
        tools.run(args, what=f"debug decode of {Path(video).name}", error=DecoderFailure,
                  stderr=stream, stderr_path=dst)

    with open(dst, "rb") as f:
        if not any(DEBUG_MARKER in line for line in f):
            raise EmptyDebugOutput(
                f"decoder printed no macroblock matrices for {Path(video).name}; "
                f"check that {tools.codec_tool} supports -debug mb_type"
            )
    return dst


@handle_error("orchestrator", "dump_motion_vectors")
def dump_motion_vectors(video: Path, dst: Path, tools: Optional[CodecTools] = None) -> Path:
    """
    Export per-block motion vectors as CSV into dst.

    Raises:
        DecoderFailure: The exporter exited nonzero
    """
    tools = tools or CodecTools()
    dst = Path(dst)
    args = [tools.resolve(tools.mv_tool), str(video)]
    with open(dst, "wb") as stream:
        tools.run(args, what=f"vector export of {Path(video).name}", error=DecoderFailure, stdout=stream)
    return dst


def _write_ladder_file(ladder: RecompressionLadder) -> None:
    data = {
        "tool_version": ladder.tool_version,
        "source": str(ladder.source),
        "width": ladder.width,
        "height": ladder.height,
        "frame_count": ladder.frame_count,
        "encode_config": ladder.config.to_dict(),
        "generations": [
            {
                "index": g.index,
                "video": str(g.video_path),
                "mb_debug": g.mb_debug_path.name,
                "mv_dump": g.mv_dump_path.name,
            }
            for g in ladder.generations
        ],
    }
    with open(ladder.directory / LADDER_FILE, "w") as f:
        yaml.safe_dump(data, f, sort_keys=False)


def _generation(directory: Path, index: int, video: Path) -> Generation:
    stem = _generation_stem(index)
    return Generation(
        index=index,
        video_path=video,
        mb_debug_path=directory / f"{stem}.mbdebug.txt",
        mv_dump_path=directory / f"{stem}.mvs.csv",
        grid_path=directory / f"{stem}.grid.txt",
    )


def build_ladder(
    src: Path,
    n: int,
    config: EncodeConfig,
    tools: Optional[CodecTools] = None,
    directory: Optional[Path] = None,
    work_dir: Optional[Path] = None,
) -> RecompressionLadder:
    """
    Re-encode src n times and dump every generation.

    Args:
        src: Suspect video (generation 0, left in place)
        n: Number of re-encodes
        config: Encoder settings shared by every generation
        tools: External tools
        directory: Ladder directory; must be absent or empty
        work_dir: Parent of a fresh temporary directory when none is given

    Raises:
        ValueError: n < 1
        Errors of probe_video, recompress and the dumps; the partial
        ladder directory is removed first
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    tools = tools or CodecTools()
    src = Path(src).resolve()

    info = probe_video(src, tools)
    tool_version = tools.version()

    if directory is None:
        directory = Path(tempfile.mkdtemp(prefix="mbm-ladder-", dir=work_dir))
    else:
        directory = Path(directory)
        if directory.exists() and any(directory.iterdir()):
            raise MbmError(f"ladder directory {directory} is not empty")
        directory.mkdir(parents=True, exist_ok=True)

    generations: List[Generation] = []
    try:
        with TimerContext(logger, "ladder", video=src.name, n=n):
            previous = src
            for index in range(n + 1):
                video = src if index == 0 else directory / f"{_generation_stem(index)}.mp4"
                if index > 0:
                    recompress(previous, config, video, tools)
                generation = _generation(directory, index, video)
                dump_mb_debug(video, generation.mb_debug_path, tools)
                dump_motion_vectors(video, generation.mv_dump_path, tools)
                generations.append(generation)
                previous = video
                logger.debug(f"{src.name}: generation {index} ready")

        ladder = RecompressionLadder(
            generations=generations,
            config=config,
            tool_version=tool_version,
            directory=directory,
            source=src,
            width=info.width,
            height=info.height,
            frame_count=info.frame_count,
        )
        _write_ladder_file(ladder)
    except BaseException:
        shutil.rmtree(directory, ignore_errors=True)
        raise

    logger.info(f"Built {n}-step ladder for {src.name} in {directory}")
    return ladder


def load_ladder(directory: Path, tools: Optional[CodecTools] = None, check_version: bool = True) -> RecompressionLadder:
    """
    Reopen a ladder directory.

    Raises:
        VideoNotFound: No ladder.yaml in directory
        ToolVersionMismatch: The current codec tool differs from the pinned one
    """
    directory = Path(directory)
    ladder_file = directory / LADDER_FILE
    if not ladder_file.is_file():
        raise VideoNotFound(f"no {LADDER_FILE} in {directory}")
    with open(ladder_file, "r") as f:
        data = yaml.safe_load(f) or {}

    if check_version:
        current = (tools or CodecTools()).version()
        if data.get("tool_version") != current:
            raise ToolVersionMismatch(
                f"ladder built with {data.get('tool_version')!r}, current tool is {current!r}"
            )

    generations = [
        Generation(
            index=int(g["index"]),
            video_path=Path(g["video"]),
            mb_debug_path=directory / g["mb_debug"],
            mv_dump_path=directory / g["mv_dump"],
            grid_path=directory / f"{_generation_stem(int(g['index']))}.grid.txt",
        )
        for g in data.get("generations", [])
    ]
    return RecompressionLadder(
        generations=generations,
        config=EncodeConfig.from_dict(data.get("encode_config", {})),
        tool_version=data.get("tool_version", ""),
        directory=directory,
        source=Path(data.get("source", "")),
        width=int(data.get("width", 0)),
        height=int(data.get("height", 0)),
        frame_count=int(data.get("frame_count", 0)),
    )


def load_generation_grids(ladder: RecompressionLadder, index: int) -> List[FrameGrid]:
    """
    Merged grids of one generation, from the grid cache when present.

    Raises:
        FrameCountMismatch: The debug stream holds a different frame count
            than the probe reported
    """
    generation = ladder.generations[index]
    if generation.grid_path is not None and generation.grid_path.is_file():
        grids = read_grids(generation.grid_path)
    else:
        frames = parse_debug_stream(generation.mb_debug_path.read_text(errors="replace"))
        mv_map = parse_mv_dump(generation.mv_dump_path)
        grids, stats = merge_with_stats(frames, mv_map, ladder.width, ladder.height)
        logger.debug(
            f"generation {index}: {len(grids)} frames, {stats.attached} vectors attached, "
            f"{stats.discarded_on_skip} skip vectors dropped"
        )
        if generation.grid_path is not None:
            write_grids(grids, generation.grid_path)

    if ladder.frame_count and len(grids) != ladder.frame_count:
        raise FrameCountMismatch(
            f"generation {index} has {len(grids)} debug frames, video has {ladder.frame_count}"
        )
    return grids


def ladder_feature_vector(ladder: RecompressionLadder, n: int) -> FeatureVector:
    """Feature vector of a built ladder, two generations in memory at a time."""
    if ladder.n < n:
        raise ValueError(f"ladder has {ladder.n} steps, {n} requested")
    return compute_feature_vector_lazy(
        lambda index: load_generation_grids(ladder, index),
        n,
        source=str(ladder.source),
    )


def discard_ladder(ladder: RecompressionLadder) -> None:
    shutil.rmtree(ladder.directory, ignore_errors=True)
    logger.debug(f"Removed ladder directory {ladder.directory}")
