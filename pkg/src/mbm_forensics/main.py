"""
MBM Forensics - Command-Line Entry Point

Detects H.264 recompression from macroblock-mode stability across a ladder
of re-encodes, classified by an RBF support vector machine.

Standard output carries data only; logs and errors go to standard error.
Exit codes: 0 success, 1 analysis error, 2 usage/IO/configuration error.
"""

import argparse
import json
import logging
import sys
from typing import Dict, Any, List, Optional, TextIO

from . import __version__
from .cli.commands import COMMANDS
from .core.config import Config
from .core.exceptions import MbmError
from .core.models import VALID_RESOLUTION_TAGS
from .utils.logger import setup_logger, get_logger

logger = get_logger("mbm_forensics.main")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand."""
    default = argparse.SUPPRESS if suppress else None
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("global options")
    group.add_argument("--config", metavar="FILE", default=default, help="YAML config file")
    group.add_argument("--codec-tool", metavar="PATH", default=default, help="ffmpeg executable")
    group.add_argument("--quality", type=int, metavar="Q", default=default, help="CRF/QP of every encode")
    group.add_argument("--gop", type=int, metavar="N", default=default, help="GOP length of every encode")
    group.add_argument("--jobs", type=int, metavar="N", default=default, help="videos processed in parallel")
    group.add_argument("--seed", type=int, default=default, help="seed for corpus, splits and folds")
    group.add_argument("--work-dir", metavar="DIR", default=default, help="parent of temporary ladders")
    group.add_argument("--cache-dir", metavar="DIR", default=default, help="feature cache directory")
    group.add_argument("--keep", action="store_true", default=default, help="keep ladder directories")
    group.add_argument("--json", action="store_true", default=default, help="JSON output")
    group.add_argument("--show-config", action="store_true", default=default,
                       help="print the effective configuration and exit")
    group.add_argument("--log-json", action="store_true", default=default, help="JSON log records")
    group.add_argument("-v", "--verbose", action="store_true", default=default, help="debug logging")
    group.add_argument("-q", "--quiet", action="store_true", default=default, help="warnings and errors only")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbm-forensics",
        description="H.264 recompression detection from macroblock-mode stability",
        parents=[_global_flags(suppress=False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    common = _global_flags(suppress=True)

    p = sub.add_parser("ladder", parents=[common], help="re-encode a video n times and dump every generation")
    p.add_argument("input", help="suspect video")
    p.add_argument("-n", type=int, default=2, help="number of re-encodes")
    p.add_argument("--out", metavar="DIR", help="ladder directory (absent or empty)")

    p = sub.add_parser("extract", parents=[common], help="feature vectors as CSV")
    p.add_argument("inputs", nargs="+", help="videos or ladder directories")
    p.add_argument("-n", type=int, default=2, help="feature length")
    p.add_argument("--label", help="class of every input (original, double, triple)")
    p.add_argument("--output", metavar="CSV", help="write CSV and its .meta.yaml instead of stdout")

    p = sub.add_parser("train", parents=[common], help="grid-search and train an SVM model")
    p.add_argument("features", nargs="+", help="labelled feature CSV files")
    p.add_argument("--model", required=True, metavar="FILE", help="model file to write")
    p.add_argument("--scaled", action="store_true", help="fit a feature scaler first")
    p.add_argument("--binary", action="store_true", help="group every recompressed label as 1")
    p.add_argument("--c-grid", metavar="GRID", help="a:b[:s] base-2 exponents or comma list")
    p.add_argument("--gamma-grid", metavar="GRID", help="a:b[:s] base-2 exponents or comma list")

    p = sub.add_parser("predict", parents=[common], help="classify one video")
    p.add_argument("input", help="video or ladder directory")
    p.add_argument("--model", required=True, metavar="FILE", help="trained model file")

    p = sub.add_parser("evaluate", parents=[common], help="train/predict experiment over a manifest")
    p.add_argument("manifest", help="dataset manifest CSV")
    p.add_argument("-n", type=int, default=2, help="feature length (2 binary, 3 three-class)")
    p.add_argument("--scaled", action="store_true", help="scale features")
    p.add_argument("--resolution", choices=list(VALID_RESOLUTION_TAGS) + ["MIX"], help="resolution filter")
    p.add_argument("--out", default="experiments", metavar="DIR", help="report directory")
    p.add_argument("--protocol", action="store_true", help="every resolution and MIX, scaled and non-scaled")
    p.add_argument("--decay", action="store_true", help="print the unstable macroblock decay curve")
    p.add_argument("--predict-on-train", action="store_true", help="classify the train split itself")
    p.add_argument("--c-grid", metavar="GRID", help="a:b[:s] base-2 exponents or comma list")
    p.add_argument("--gamma-grid", metavar="GRID", help="a:b[:s] base-2 exponents or comma list")

    p = sub.add_parser("synthesize", parents=[common], help="generate a labelled procedural corpus")
    p.add_argument("output", help="corpus directory")
    p.add_argument("--original", type=int, default=10, help="original clips per resolution")
    p.add_argument("--double", type=int, default=10, help="double-compressed clips per resolution")
    p.add_argument("--triple", type=int, default=0, help="triple-compressed clips per resolution")
    p.add_argument("--resolution", action="append", metavar="WxH", help="clip size, repeatable")

    return parser


def _flag(args: argparse.Namespace, name: str) -> Any:
    return getattr(args, name, None)


def config_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Command-line overrides of config keys; absent flags are None."""
    return {
        "codec_tool": _flag(args, "codec_tool"),
        "quality_scale": _flag(args, "quality"),
        "gop_length": _flag(args, "gop"),
        "jobs": _flag(args, "jobs"),
        "seed": _flag(args, "seed"),
        "work_dir": _flag(args, "work_dir"),
        "cache_dir": _flag(args, "cache_dir"),
        "keep": True if _flag(args, "keep") else None,
    }


def report_error(error: BaseException, exit_code: int, stream: TextIO) -> int:
    """One machine-parseable JSON line on standard error."""
    stream.write(json.dumps({
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": exit_code,
    }) + "\n")
    return exit_code


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Main application entry point."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    args.json = bool(_flag(args, "json"))

    level = logging.INFO
    if _flag(args, "verbose"):
        level = logging.DEBUG
    elif _flag(args, "quiet"):
        level = logging.WARNING
    setup_logger("mbm_forensics", level=level, enable_structured=bool(_flag(args, "log_json")))

    try:
        config = Config(config_file=_flag(args, "config"), flags=config_flags(args))

        if _flag(args, "show_config"):
            stdout.write(config.render_table() + "\n")
            return 0
        if not args.command:
            parser.print_usage(stderr)
            return 2

        logger.debug(f"mbm-forensics {__version__}: {args.command}")
        return COMMANDS[args.command](args, config, stdout)

    except MbmError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        return report_error(e, e.exit_code, stderr)
    except (OSError, ValueError) as e:
        return report_error(e, 2, stderr)
    except KeyboardInterrupt as e:
        return report_error(e, 1, stderr)
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return report_error(e, 1, stderr)


if __name__ == "__main__":
    sys.exit(main())
