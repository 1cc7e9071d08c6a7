"""
Exception hierarchy for MBM Forensics.

Every failure the pipeline can report is a subclass of MbmError. The
category decides the CLI exit code (usage/io/configuration -> 2, the rest -> 1).
"""

from enum import Enum
from typing import Optional


class ErrorCategory(Enum):
    """Error categories for targeted handling."""
    USAGE = "usage"
    IO = "io"
    CONFIGURATION = "configuration"
    CODEC = "codec"
    ANALYSIS = "analysis"


class MbmError(Exception):
    """Base class for all pipeline errors."""

    category: ErrorCategory = ErrorCategory.ANALYSIS

    @property
    def exit_code(self) -> int:
        if self.category in (ErrorCategory.USAGE, ErrorCategory.IO, ErrorCategory.CONFIGURATION):
            return 2
        return 1


# ============================================================================
# Configuration / IO
# ============================================================================

class UsageError(MbmError):
    """Bad command-line input that argparse cannot catch."""

    category = ErrorCategory.USAGE


class ConfigError(MbmError):
    category = ErrorCategory.CONFIGURATION


class ToolNotFound(MbmError):
    category = ErrorCategory.CONFIGURATION


class VideoNotFound(MbmError):
    category = ErrorCategory.IO


class ManifestError(MbmError):
    category = ErrorCategory.IO


class ModelFormatError(MbmError):
    category = ErrorCategory.IO


# ============================================================================
# Codec orchestration
# ============================================================================

class NotAVideo(MbmError):
    category = ErrorCategory.CODEC


class UnsupportedCodec(MbmError):
    category = ErrorCategory.CODEC


class ExternalProcessError(MbmError):
    """A child process exited nonzero; stderr is kept for diagnostics."""

    category = ErrorCategory.CODEC

    def __init__(self, message: str, returncode: Optional[int] = None, stderr: str = ""):
        tail = stderr.strip().splitlines()[-5:] if stderr else []
        detail = f" (exit {returncode})" if returncode is not None else ""
        if tail:
            detail += ": " + " | ".join(tail)
        super().__init__(message + detail)
        self.returncode = returncode
        self.stderr = stderr


class EncoderFailure(ExternalProcessError):
    pass


class DecoderFailure(ExternalProcessError):
    pass


class EmptyDebugOutput(MbmError):
    category = ErrorCategory.CODEC


class FrameCountMismatch(MbmError):
    pass


class ToolVersionMismatch(MbmError):
    pass


# ============================================================================
# Parsing / merge
# ============================================================================

class GrammarError(MbmError):
    """Unparseable line in a debug stream or motion-vector dump."""

    def __init__(self, line_no: int, excerpt: str, reason: str = "unparseable line"):
        super().__init__(f"line {line_no}: {reason}: {excerpt[:80]!r}")
        self.line_no = line_no
        self.excerpt = excerpt
        self.reason = reason


class DimensionMismatch(MbmError):
    pass


class InvalidBlockSize(MbmError):
    pass


class OrphanVector(MbmError):
    pass


class MvOnIntra(MbmError):
    pass


class FrameTypeConflict(MbmError):
    """An I-frame header over a grid holding inter macroblocks."""


# ============================================================================
# Features / classifier
# ============================================================================

class NoPFrames(MbmError):
    pass


class EmptyTrainingSet(MbmError):
    pass


class LengthMismatch(MbmError):
    pass


class SingleClassInput(MbmError):
    pass


class ScalingMismatch(MbmError):
    pass


class InsufficientSamples(MbmError):
    pass


class InsufficientTrainingData(MbmError):
    pass
