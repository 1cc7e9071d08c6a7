"""
Corpus-wide feature extraction.

Each manifest entry gets its own ladder of n re-encodes; the resulting
feature vector is cached by content so reruns skip finished videos. A video
that fails is recorded and excluded, never fatal for the corpus.
"""

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Dict, Any

from tqdm import tqdm

from ..codec.orchestrator import build_ladder, ladder_feature_vector, discard_ladder
from ..codec.tools import CodecTools
from ..core.models import DatasetEntry, DatasetManifest, EncodeConfig, FeatureVector
from ..feature.store import FeatureTableMeta
from ..utils.error_handler import ErrorHandler, ErrorContext, ErrorRecord, ErrorSeverity
from ..utils.logger import get_logger, TimerContext
from ..utils.threading_utils import WorkerPool
from .cache import FeatureCache

logger = get_logger(__name__)


@dataclass
class ExtractionResult:
    """Feature vectors of the entries that succeeded, sorted by path."""
    entries: List[DatasetEntry]
    vectors: List[FeatureVector]               # labelled with the true VideoClass value
    failures: List[ErrorRecord] = field(default_factory=list)
    meta: Optional[FeatureTableMeta] = None
    cache_stats: Dict[str, int] = field(default_factory=dict)
    duration_s: float = 0.0

    def for_entries(self, wanted: List[DatasetEntry]) -> "ExtractionResult":
        """Restrict to the given entries (those that failed stay absent)."""
        keep = {e.path for e in wanted}
        pairs = [(e, v) for e, v in zip(self.entries, self.vectors) if e.path in keep]
        return ExtractionResult(
            entries=[e for e, _ in pairs],
            vectors=[v for _, v in pairs],
            failures=[r for r in self.failures if Path(r.subject) in keep],
            meta=self.meta,
            cache_stats=dict(self.cache_stats),
            duration_s=self.duration_s,
        )

    @property
    def excluded(self) -> List[str]:
        return sorted(r.subject for r in self.failures)


def extract_video_features(
    video: Path,
    n: int,
    config: EncodeConfig,
    tools: Optional[CodecTools] = None,
    cache: Optional[FeatureCache] = None,
    work_dir: Optional[Path] = None,
    keep: bool = False,
) -> FeatureVector:
    """
    Feature vector of one video, from the cache when possible.

    The ladder lives in a temporary directory under work_dir and is removed
    afterwards unless keep is set.
    """
    tools = tools or CodecTools()
    video = Path(video)
    key = None
    if cache is not None:
        key = cache.key_for(video, n, config, tools.version())
        cached = cache.get(key, source=str(video))
        if cached is not None:
            logger.debug(f"Cache hit for {video.name}")
            return cached

    ladder = build_ladder(video, n, config, tools, work_dir=work_dir)
    try:
        vector = ladder_feature_vector(ladder, n)
    finally:
        if keep:
            logger.info(f"Kept ladder of {video.name} in {ladder.directory}")
        else:
            discard_ladder(ladder)

    vector = FeatureVector(values=vector.values, source=str(video))
    if cache is not None and key is not None:
        cache.put(key, vector)
    return vector


def extract_corpus_features(
    manifest: DatasetManifest,
    n: int,
    config,
    tools: Optional[CodecTools] = None,
    cache: Optional[FeatureCache] = None,
    progress: bool = True,
) -> ExtractionResult:
    """
    One labelled FeatureVector per manifest entry.

    Args:
        manifest: Validated manifest
        n: Feature length (ladder depth)
        config: Effective Config (encoder settings, jobs, keep, work/cache dirs)
        tools: External tools
        cache: Feature cache; defaults to the configured cache directory
        progress: Show a progress bar on stderr

    Returns:
        ExtractionResult sorted by video path; failed entries are listed in
        `failures` and left out of `vectors`
    """
    tools = tools or CodecTools.from_config(config)
    cache = cache or FeatureCache(config.get_cache_dir())
    encode_config = config.encode_config()
    work_dir = config.get_work_dir()
    keep = bool(config.get("keep"))
    tool_version = tools.version()

    entries = sorted(manifest.entries, key=lambda e: str(e.path))
    errors = ErrorHandler()
    lock = threading.Lock()

    def extract_one(entry: DatasetEntry) -> FeatureVector:
        vector = extract_video_features(entry.path, n, encode_config, tools, cache, work_dir, keep)
        return vector.with_label(int(entry.video_class))

    with TimerContext(logger, "extraction", videos=len(entries), n=n) as timer, \
            tqdm(total=len(entries), desc="extract", unit="video", disable=not progress) as bar:

        def on_done(outcome) -> None:
            with lock:
                bar.update(1)

        outcomes = WorkerPool("extract", config.get("jobs")).map(extract_one, entries, on_done=on_done)

    kept_entries: List[DatasetEntry] = []
    vectors: List[FeatureVector] = []
    for entry, outcome in zip(entries, outcomes):
        if outcome.ok:
            kept_entries.append(entry)
            vectors.append(outcome.value)
        else:
            errors.handle_error(
                outcome.error,
                ErrorContext(
                    component="harness",
                    operation="extract_corpus_features",
                    subject=str(entry.path),
                    severity=ErrorSeverity.LOW,
                ),
            )

    stats = errors.get_error_stats()
    if stats["total_errors"]:
        logger.warning(
            f"{stats['total_errors']} of {len(entries)} videos failed extraction and were excluded "
            f"({stats['error_counts_by_category']})"
        )

    meta = FeatureTableMeta(
        n=n,
        tool_version=tool_version,
        encode_config=encode_config.to_dict(),
        sources=[v.source for v in vectors],
    )
    logger.info(
        f"Extracted {len(vectors)} feature vectors (n={n}) in {timer.duration_s:.1f}s, "
        f"cache {cache.stats()}"
    )
    return ExtractionResult(
        entries=kept_entries,
        vectors=vectors,
        failures=errors.records,
        meta=meta,
        cache_stats=cache.stats(),
        duration_s=timer.duration_s,
    )


def summarize_failures(result: ExtractionResult) -> List[Dict[str, Any]]:
    return [
        {"video": r.subject, "error": r.error_type, "message": r.message, "category": r.category}
        for r in result.failures
    ]
