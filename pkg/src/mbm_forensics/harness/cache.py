"""
Content-addressed feature cache.

A feature vector is keyed by the sha256 of (video content digest, n,
encoder settings, codec tool version) and stored as a small JSON file
under `<cache_dir>/<key[:2]>/<key>.json`. Reruns of a corpus extraction
only build ladders for videos whose key is missing.
"""

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Dict, Optional

from ..core.models import EncodeConfig, FeatureVector
from ..utils.logger import get_logger

logger = get_logger(__name__)

CHUNK_SIZE = 1 << 20


def file_digest(path: Path) -> str:
    """sha256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            h.update(chunk)
    return h.hexdigest()


def feature_key(video_digest: str, n: int, config: EncodeConfig, tool_version: str) -> str:
    payload = json.dumps(
        {
            "video": video_digest,
            "n": n,
            "encode_config": config.to_dict(),
            "tool_version": tool_version,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class FeatureCache:
    """Feature vectors on disk, one JSON file per key."""

    def __init__(self, cache_dir: Path):
        self.cache_dir = Path(cache_dir)
        self._digests: Dict[Path, str] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def video_digest(self, video: Path) -> str:
        video = Path(video).resolve()
        with self._lock:
            cached = self._digests.get(video)
        if cached is None:
            cached = file_digest(video)
            with self._lock:
                self._digests[video] = cached
        return cached

    def key_for(self, video: Path, n: int, config: EncodeConfig, tool_version: str) -> str:
        return feature_key(self.video_digest(video), n, config, tool_version)

    def _path(self, key: str) -> Path:
        return self.cache_dir / key[:2] / f"{key}.json"

    def get(self, key: str, source: str = "") -> Optional[FeatureVector]:
        path = self._path(key)
        if not path.is_file():
            with self._lock:
                self.misses += 1
            return None
        try:
            data = json.loads(path.read_text())
            values = tuple(float(v) for v in data["values"])
        except (OSError, ValueError, KeyError, TypeError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path}: {e}")
            with self._lock:
                self.misses += 1
            return None
        with self._lock:
            self.hits += 1
        return FeatureVector(values=values, source=source or data.get("source", ""))

    def put(self, key: str, vector: FeatureVector) -> Path:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps({"values": list(vector.values), "source": vector.source}, sort_keys=True)
        self._write_atomic(path, payload)
        return path

    @staticmethod
    def _write_atomic(path: Path, text: str) -> None:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
        try:
            with os.fdopen(fd, "w") as f:
                f.write(text)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {"hits": self.hits, "misses": self.misses}
