"""
Test suite for the content-addressed feature cache.
"""

from mbm_forensics.core.models import EncodeConfig, FeatureVector
from mbm_forensics.harness.cache import FeatureCache, feature_key, file_digest

VERSION = "ffmpeg version 6.1.1"


def _video(tmp_path, name="clip.mp4", payload=b"frames"):
    path = tmp_path / name
    path.write_bytes(payload)
    return path


def test_key_depends_on_every_input():
    """Content, n, encoder settings and tool version all change the key."""
    base = feature_key("abc", 2, EncodeConfig(), VERSION)
    assert base == feature_key("abc", 2, EncodeConfig(), VERSION)
    assert len(base) == 64

    variants = [
        feature_key("abd", 2, EncodeConfig(), VERSION),
        feature_key("abc", 3, EncodeConfig(), VERSION),
        feature_key("abc", 2, EncodeConfig(quality_scale=18), VERSION),
        feature_key("abc", 2, EncodeConfig(), "ffmpeg version 7.0"),
    ]
    assert len({base, *variants}) == 5


def test_key_follows_content_not_path(tmp_path):
    """Two paths with the same bytes share a key."""
    cache = FeatureCache(tmp_path / "cache")
    a = _video(tmp_path, "a.mp4")
    b = _video(tmp_path, "b.mp4")
    c = _video(tmp_path, "c.mp4", b"other frames")

    assert file_digest(a) == file_digest(b)
    assert cache.key_for(a, 2, EncodeConfig(), VERSION) == cache.key_for(b, 2, EncodeConfig(), VERSION)
    assert cache.key_for(a, 2, EncodeConfig(), VERSION) != cache.key_for(c, 2, EncodeConfig(), VERSION)


def test_put_then_get(tmp_path):
    """Stored values come back exactly; misses and hits are counted."""
    cache = FeatureCache(tmp_path / "cache")
    key = cache.key_for(_video(tmp_path), 3, EncodeConfig(), VERSION)

    assert cache.get(key) is None
    path = cache.put(key, FeatureVector((12.5, 3.0, 0.1), source="clip.mp4"))
    assert path == tmp_path / "cache" / key[:2] / f"{key}.json"
    assert [p.name for p in path.parent.iterdir()] == [path.name]

    hit = cache.get(key)
    assert hit.values == (12.5, 3.0, 0.1)
    assert hit.source == "clip.mp4"
    assert cache.get(key, source="elsewhere.mp4").source == "elsewhere.mp4"
    assert cache.stats() == {"hits": 2, "misses": 1}


def test_unreadable_entry_is_a_miss(tmp_path):
    """Corrupt cache files are ignored rather than trusted."""
    cache = FeatureCache(tmp_path / "cache")
    key = "ab" + "0" * 62
    cache.put(key, FeatureVector((1.0,)))
    (tmp_path / "cache" / "ab" / f"{key}.json").write_text("{not json")

    assert cache.get(key) is None
    assert cache.misses == 1

    cache.put(key, FeatureVector((2.0,)))
    assert cache.get(key).values == (2.0,)
