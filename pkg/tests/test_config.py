"""
Test suite for layered configuration.
"""

from pathlib import Path

import pytest
import yaml

from mbm_forensics.core.config import DEFAULTS, Config
from mbm_forensics.core.exceptions import ConfigError
from mbm_forensics.core.models import EncodeConfig

REPO_CONFIG = Path(__file__).parent.parent / "config" / "mbm.yaml"


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """No stray ./mbm.yaml from the working directory."""
    monkeypatch.chdir(tmp_path)


def _write_yaml(path: Path, data) -> Path:
    path.write_text(yaml.safe_dump(data))
    return path


def test_defaults():
    """Without file, env or flags every key has its default."""
    config = Config(environ={})
    assert config.get("quality_scale") == 23
    assert config.get("gop_length") == 12
    assert config.source("quality_scale") == "default"
    assert config.encode_config() == EncodeConfig()
    assert config.config_file is None


def test_layer_priority(tmp_path):
    """Flags beat environment, environment beats file, file beats defaults."""
    config_file = _write_yaml(tmp_path / "custom.yaml", {"quality_scale": 18, "gop_length": 30, "jobs": 2})
    environ = {"MBM_GOP_LENGTH": "24", "MBM_JOBS": "3"}
    config = Config(config_file=config_file, environ=environ, flags={"jobs": 8, "seed": None})

    assert config.get("quality_scale") == 18
    assert config.source("quality_scale") == f"file:{config_file}"
    assert config.get("gop_length") == 24
    assert config.source("gop_length") == "env:MBM_GOP_LENGTH"
    assert config.get("jobs") == 8
    assert config.source("jobs") == "flag"
    assert config.source("seed") == "default"


def test_config_file_from_environment_and_cwd(tmp_path):
    """MBM_CONFIG names a file; otherwise ./mbm.yaml is picked up."""
    named = _write_yaml(tmp_path / "named.yaml", {"preset": "fast"})
    assert Config(environ={"MBM_CONFIG": str(named)}).get("preset") == "fast"

    _write_yaml(tmp_path / "mbm.yaml", {"preset": "slow"})
    assert Config(environ={}).get("preset") == "slow"


def test_env_coercion():
    """Environment strings become booleans, integers and floats."""
    config = Config(environ={"MBM_KEEP": "yes", "MBM_SEED": "7", "MBM_TRAIN_FRACTION": "0.75"})
    assert config.get("keep") is True
    assert config.get("seed") == 7
    assert config.get("train_fraction") == 0.75


@pytest.mark.parametrize("key,value", [
    ("quality_scale", "52"),
    ("gop_length", "0"),
    ("rate_control", "vbr"),
    ("preset", "warp"),
    ("keep", "maybe"),
    ("jobs", "many"),
    ("folds", "1"),
    ("train_fraction", "1.5"),
])
def test_invalid_values(key, value):
    """Out-of-range or ill-typed values are configuration errors."""
    with pytest.raises(ConfigError):
        Config(environ={f"MBM_{key.upper()}": value})


def test_bad_files_and_flags(tmp_path):
    """Missing files, non-mapping YAML and unknown flags."""
    with pytest.raises(ConfigError):
        Config(config_file=tmp_path / "absent.yaml", environ={})

    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        Config(config_file=listing, environ={})

    broken = tmp_path / "broken.yaml"
    broken.write_text("quality_scale: [1,\n")
    with pytest.raises(ConfigError):
        Config(config_file=broken, environ={})

    with pytest.raises(ConfigError):
        Config(environ={}, flags={"colour": "blue"})


def test_unknown_file_keys_are_ignored(tmp_path):
    """Unknown keys in a file only warn."""
    config_file = _write_yaml(tmp_path / "extra.yaml", {"colour": "blue", "b_frames": 0})
    config = Config(config_file=config_file, environ={})
    assert config.get("b_frames") == 0
    with pytest.raises(ConfigError):
        config.get("colour")


def test_shipped_config_matches_defaults():
    """config/mbm.yaml restates the built-in defaults."""
    config = Config(config_file=REPO_CONFIG, environ={})
    for key, value in DEFAULTS.items():
        if key in ("work_dir", "cache_dir"):
            continue
        assert config.get(key) == value, key


def test_render_table_lists_every_key(tmp_path):
    """--show-config prints key, value and source for each setting."""
    config = Config(environ={"MBM_KEEP": "true"}, flags={"cache_dir": str(tmp_path / "c")})
    lines = config.render_table().splitlines()
    assert len(lines) == len(DEFAULTS)
    keep_line = next(line for line in lines if line.startswith("keep"))
    assert "true" in keep_line and "env:MBM_KEEP" in keep_line
    assert config.get_cache_dir().is_dir()
    assert config.get_work_dir() is None
