"""
External codec tools.

Resolves the encoder/decoder (ffmpeg), the prober (ffprobe) and the
motion-vector exporter (an extract_mvs build) and runs them as child
processes. The codec tool's version string is read once and pinned into
every ladder.
"""

import shutil
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Type, IO, Union

from ..core.exceptions import ToolNotFound, ExternalProcessError
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class CodecTools:
    codec_tool: str = "ffmpeg"
    probe_tool: str = "ffprobe"
    mv_tool: str = "extract_mvs"
    decoder_name: str = "h264"
    _version: Optional[str] = field(default=None, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    @classmethod
    def from_config(cls, config) -> "CodecTools":
        return cls(
            codec_tool=config.get("codec_tool"),
            probe_tool=config.get("probe_tool"),
            mv_tool=config.get("mv_tool"),
            decoder_name=config.get("decoder_name"),
        )

    def resolve(self, tool: str) -> str:
        """Absolute path of a tool given by name or path."""
        candidate = Path(tool).expanduser()
        if candidate.parent != Path(".") and candidate.is_file():
            return str(candidate)
        found = shutil.which(tool)
        if found is None:
            raise ToolNotFound(f"'{tool}' not found (set the path in the config or MBM_* environment)")
        return found

    def available(self, tool: str) -> bool:
        try:
            self.resolve(tool)
            return True
        except ToolNotFound:
            return False

    def version(self) -> str:
        """First line of `<codec_tool> -version`, cached."""
        with self._lock:
            if self._version is None:
                result = self.run(
                    [self.resolve(self.codec_tool), "-version"],
                    what="codec tool version query",
                    capture=True,
                )
                lines = result.stdout.decode(errors="replace").strip().splitlines()
                self._version = lines[0].strip() if lines else "unknown"
                logger.debug(f"Codec tool version: {self._version}")
            return self._version

    def run(
        self,
        args: List[str],
        what: str,
        error: Type[ExternalProcessError] = ExternalProcessError,
        stdout: Optional[IO[bytes]] = None,
        stderr: Optional[IO[bytes]] = None,
        input: Optional[bytes] = None,
        capture: bool = False,
        stderr_path: Optional[Union[str, Path]] = None,
    ) -> subprocess.CompletedProcess:
        """
        Run a child process; nonzero exit raises `error` with the stderr tail.

        Args:
            args: Full command line
            what: Description for log and error messages
            error: ExternalProcessError subclass raised on failure
            stdout/stderr: Open binary files to stream into
            input: Bytes fed to stdin
            capture: Capture stdout and stderr in memory
            stderr_path: File stderr was streamed to, read back for errors
        """
        logger.debug(f"Running {what}: {' '.join(args)}")
        try:
            result = subprocess.run(
                args,
                input=input,
                stdin=None if input is not None else subprocess.DEVNULL,
                stdout=subprocess.PIPE if capture else (stdout or subprocess.DEVNULL),
                stderr=subprocess.PIPE if capture else (stderr or subprocess.PIPE),
                check=False,
            )
        except FileNotFoundError as e:
            raise ToolNotFound(f"{args[0]}: {e}") from e

        if result.returncode != 0:
            if result.stderr:
                diagnostics = result.stderr.decode(errors="replace")
            elif stderr_path is not None and Path(stderr_path).is_file():
                diagnostics = Path(stderr_path).read_text(errors="replace")[-4000:]
            else:
                diagnostics = ""
            raise error(f"{what} failed", returncode=result.returncode, stderr=diagnostics)
        return result
