"""
Configuration management for MBM Forensics.

Implements a layered configuration with per-key validation:
1. Built-in defaults
2. YAML config file (--config, MBM_CONFIG, or ./mbm.yaml)
3. Environment variables MBM_<KEY> (a .env file is loaded first)
4. Command-line flags (highest priority)

Every effective value remembers the layer it came from so --show-config can
print where a setting was decided.
"""

import os
from pathlib import Path
from typing import Optional, Dict, Any, Callable, List, Tuple, Mapping

import yaml
from dotenv import load_dotenv

from ..core.exceptions import ConfigError
from ..core.models import EncodeConfig
from ..utils.logger import get_logger

logger = get_logger(__name__)

ENV_PREFIX = "MBM_"
DEFAULT_CONFIG_FILE = "mbm.yaml"

DEFAULTS: Dict[str, Any] = {
    # External tools
    "codec_tool": "ffmpeg",
    "probe_tool": "ffprobe",
    "mv_tool": "extract_mvs",
    "decoder_name": "h264",
    # Encoder settings shared by every ladder generation
    "quality_scale": 23,
    "rate_control": "crf",
    "gop_length": 12,
    "b_frames": 2,
    "preset": "medium",
    "encoder_threads": 1,
    # Runtime
    "jobs": 1,
    "seed": 1234,
    "keep": False,
    "work_dir": None,
    "cache_dir": str(Path.home() / ".cache" / "mbm-forensics"),
    # Experiments
    "folds": 5,
    "scaling_method": "standard",
    "clip_frames": 60,
    "clip_fps": 30,
    "train_fraction": 0.5,
}

_X264_PRESETS = (
    "ultrafast", "superfast", "veryfast", "faster", "fast",
    "medium", "slow", "slower", "veryslow", "placebo",
)

VALIDATORS: Dict[str, Tuple[Callable[[Any], bool], str]] = {
    "codec_tool": (lambda x: isinstance(x, str) and x != "", "non-empty path"),
    "probe_tool": (lambda x: isinstance(x, str) and x != "", "non-empty path"),
    "mv_tool": (lambda x: isinstance(x, str) and x != "", "non-empty path"),
    "decoder_name": (lambda x: isinstance(x, str) and x != "", "decoder name"),
    "quality_scale": (lambda x: isinstance(x, int) and 0 <= x <= 51, "integer in [0, 51]"),
    "rate_control": (lambda x: x in ("crf", "qp"), "'crf' or 'qp'"),
    "gop_length": (lambda x: isinstance(x, int) and 1 <= x <= 1000, "integer in [1, 1000]"),
    "b_frames": (lambda x: isinstance(x, int) and 0 <= x <= 16, "integer in [0, 16]"),
    "preset": (lambda x: x in _X264_PRESETS, "an x264 preset name"),
    "encoder_threads": (lambda x: isinstance(x, int) and 1 <= x <= 64, "integer in [1, 64]"),
    "jobs": (lambda x: isinstance(x, int) and 1 <= x <= 256, "integer in [1, 256]"),
    "seed": (lambda x: isinstance(x, int) and x >= 0, "non-negative integer"),
    "keep": (lambda x: isinstance(x, bool), "boolean"),
    "work_dir": (lambda x: x is None or isinstance(x, str), "directory path"),
    "cache_dir": (lambda x: x is None or isinstance(x, str), "directory path"),
    "folds": (lambda x: isinstance(x, int) and 2 <= x <= 100, "integer in [2, 100]"),
    "scaling_method": (lambda x: x in ("standard", "minmax"), "'standard' or 'minmax'"),
    "clip_frames": (lambda x: isinstance(x, int) and 2 <= x <= 10000, "integer in [2, 10000]"),
    "clip_fps": (lambda x: isinstance(x, int) and 1 <= x <= 240, "integer in [1, 240]"),
    "train_fraction": (
        lambda x: isinstance(x, float) and 0.0 < x < 1.0, "fraction in (0, 1)"
    ),
}

_TRUE_STRINGS = ("1", "true", "yes", "on")
_FALSE_STRINGS = ("0", "false", "no", "off")


def _coerce(key: str, value: Any) -> Any:
    """Convert strings (env vars) and YAML scalars to the default's type."""
    default = DEFAULTS[key]
    if value is None:
        return None
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE_STRINGS:
            return True
        if text in _FALSE_STRINGS:
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(default, int):
        if isinstance(value, bool):
            raise ValueError(f"not an integer: {value!r}")
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"not an integer: {value!r}")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


class Config:
    """Layered configuration with source tracking."""

    def __init__(
        self,
        config_file: Optional[Path] = None,
        environ: Optional[Mapping[str, str]] = None,
        flags: Optional[Dict[str, Any]] = None,
        load_env_file: bool = True,
    ):
        """
        Initialize configuration.

        Args:
            config_file: Explicit YAML config file (must exist when given)
            environ: Environment mapping (defaults to os.environ)
            flags: Command-line overrides; None values are ignored
            load_env_file: Load a .env file into os.environ first
        """
        if load_env_file and environ is None:
            load_dotenv()
        self._environ = os.environ if environ is None else environ

        self._values: Dict[str, Any] = dict(DEFAULTS)
        self._sources: Dict[str, str] = {key: "default" for key in DEFAULTS}

        self.config_file = self._locate_config_file(config_file)
        if self.config_file is not None:
            self._apply_layer(self._load_config_file(self.config_file), f"file:{self.config_file}")

        self._apply_env()

        if flags:
            self.apply_flags(flags)

        logger.debug(f"Configuration loaded (file: {self.config_file or 'none'})")

    # ------------------------------------------------------------------
    # Loading
    # ------------------------------------------------------------------

    def _locate_config_file(self, explicit: Optional[Path]) -> Optional[Path]:
        if explicit is not None:
            path = Path(explicit)
            if not path.is_file():
                raise ConfigError(f"Config file not found: {path}")
            return path

        env_path = self._environ.get(f"{ENV_PREFIX}CONFIG")
        if env_path:
            path = Path(env_path)
            if not path.is_file():
                raise ConfigError(f"Config file not found: {path} (from env:{ENV_PREFIX}CONFIG)")
            return path

        local = Path.cwd() / DEFAULT_CONFIG_FILE
        return local if local.is_file() else None

    def _load_config_file(self, path: Path) -> Dict[str, Any]:
        try:
            with open(path, "r") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
        except OSError as e:
            raise ConfigError(f"Cannot read config file {path}: {e}") from e

        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a mapping of settings")

        unknown = sorted(set(data) - set(DEFAULTS))
        for key in unknown:
            logger.warning(f"Ignoring unknown config key '{key}' in {path}")
        return {k: v for k, v in data.items() if k in DEFAULTS}

    def _apply_env(self) -> None:
        layer = {}
        sources = {}
        for key in DEFAULTS:
            env_key = f"{ENV_PREFIX}{key.upper()}"
            if env_key in self._environ:
                layer[key] = self._environ[env_key]
                sources[key] = f"env:{env_key}"
        for key, value in layer.items():
            self._set(key, value, sources[key])

    def _apply_layer(self, layer: Dict[str, Any], source: str) -> None:
        for key, value in layer.items():
            self._set(key, value, source)

    def apply_flags(self, flags: Dict[str, Any]) -> None:
        """Apply command-line overrides (None means 'flag not given')."""
        for key, value in flags.items():
            if value is None:
                continue
            if key not in DEFAULTS:
                raise ConfigError(f"Unknown setting '{key}' (source: flag)")
            self._set(key, value, "flag")

    def _set(self, key: str, value: Any, source: str) -> None:
        try:
            coerced = _coerce(key, value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value for '{key}' from {source}: {e}") from e

        validator, expected = VALIDATORS[key]
        if not validator(coerced):
            raise ConfigError(
                f"Invalid value for '{key}' from {source}: {value!r} (expected {expected})"
            )
        self._values[key] = coerced
        self._sources[key] = source

    # ------------------------------------------------------------------
    # Access
    # ------------------------------------------------------------------

    def get(self, key: str) -> Any:
        if key not in self._values:
            raise ConfigError(f"Unknown setting '{key}'")
        return self._values[key]

    def source(self, key: str) -> str:
        return self._sources[key]

    def __getattr__(self, key: str) -> Any:
        values = self.__dict__.get("_values")
        if values is not None and key in values:
            return values[key]
        raise AttributeError(key)

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._values)

    def effective_table(self) -> List[Tuple[str, Any, str]]:
        """(key, value, source) rows in declaration order."""
        return [(key, self._values[key], self._sources[key]) for key in DEFAULTS]

    def render_table(self) -> str:
        rows = self.effective_table()
        width = max(len(key) for key, _, _ in rows)
        lines = []
        for key, value, source in rows:
            shown = "" if value is None else value
            if isinstance(shown, bool):
                shown = str(shown).lower()
            lines.append(f"{key:<{width}}  {shown!s:<24}  {source}")
        return "\n".join(lines)

    def encode_config(self) -> EncodeConfig:
        return EncodeConfig(
            quality_scale=self._values["quality_scale"],
            gop_length=self._values["gop_length"],
            b_frames=self._values["b_frames"],
            preset=self._values["preset"],
            rate_control=self._values["rate_control"],
            encoder_threads=self._values["encoder_threads"],
        )

    def get_cache_dir(self) -> Path:
        path = Path(self._values["cache_dir"]).expanduser()
        path.mkdir(parents=True, exist_ok=True)
        return path

    def get_work_dir(self) -> Optional[Path]:
        value = self._values["work_dir"]
        if value is None:
            return None
        path = Path(value).expanduser()
        path.mkdir(parents=True, exist_ok=True)
        return path
