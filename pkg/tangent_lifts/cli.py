"""
Command line entry point: run a config, list the catalog, or run only the
integrations of a config.

    python -m tangent_lifts run config.json [--seed N] [--tol T] [--out-dir D] [--format json|text]
    python -m tangent_lifts integrate config.json [...]
    python -m tangent_lifts catalog [--format json|text]
"""

import argparse
import json
import sys
from typing import IO, Any, Dict, List, Optional, Sequence

from kybra_simple_logging import get_logger

from . import __version__
from .catalog import describe_catalog
from .config import FORMAT_JSON, FORMAT_TEXT, RunConfig, load_config
from .constants import EXIT_OK, EXIT_USAGE, TASK_INTEGRATE
from .errors import ConfigError, TangentLiftsError
from .reports import TOOL_NAME, ReportBook, render_text
from .storage import DirectoryStorage
from .tasks import run_config

logger = get_logger(__name__)


def build_envelope(config: RunConfig) -> Dict[str, Any]:
    """Fields every report of a run carries."""
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "config_hash": config.config_hash(),
        "seed": config.sampling.seed,
        "tolerances": config.tolerances.serialize(),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Affine transport lifts on tangent bundles: verify, classify, integrate.",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "Run every task of a config file"),
        ("integrate", "Run only the integrate tasks of a config file"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="Path to the JSON run config")
        p.add_argument("--seed", type=int, default=None, help="Override sampling.seed")
        p.add_argument("--tol", type=float, default=None, help="Override every tolerance")
        p.add_argument("--out-dir", default=None, help="Override output.directory")
        p.add_argument(
            "--format", choices=(FORMAT_JSON, FORMAT_TEXT), default=None, help="Stdout format"
        )

    p = sub.add_parser("catalog", help="List built-in manifolds and their example fields")
    p.add_argument("--format", choices=(FORMAT_JSON, FORMAT_TEXT), default=FORMAT_TEXT)
    return parser


def _catalog_text(entries: List[dict]) -> str:
    lines = []
    for e in entries:
        params = ", ".join(f"{k}={v:g}" for k, v in sorted(e["parameters"].items())) or "none"
        lines.append(f"{e['name']} (dimension {e['dimension']}): {e['description']}")
        lines.append(f"  coordinates: {', '.join(e['coordinates'])}")
        lines.append(f"  parameters: {params}")
        lines.append(f"  region: {'; '.join(e['region']) or 'whole chart'}")
        for field_name, components in sorted(e["fields"].items()):
            lines.append(f"  field {field_name}: ({', '.join(components)})")
    return "\n".join(lines) + "\n"


def command_catalog(fmt: str, out: IO[str]) -> int:
    entries = describe_catalog()
    if fmt == FORMAT_JSON:
        out.write(json.dumps(entries, sort_keys=True, indent=2) + "\n")
    else:
        out.write(_catalog_text(entries))
    return EXIT_OK


def _print_reports(book: ReportBook, fmt: str, out: IO[str]) -> None:
    if fmt == FORMAT_JSON:
        out.write(book.dump_json(pretty=True) + "\n")
        return
    for label in book.labels:
        out.write(f"== {label}\n")
        out.write(book.load_text(label) or "")


def command_run(args: argparse.Namespace, out: IO[str], only: Optional[Sequence[str]] = None) -> int:
    config = load_config(args.config)
    config.apply_overrides(args.seed, args.tol, args.out_dir, args.format)
    if only is not None and not any(t.task in only for t in config.tasks):
        raise ConfigError(f"Config {args.config} has no {', '.join(only)} tasks")
    storage = DirectoryStorage(config.output.directory)
    outcome = run_config(config, build_envelope(config), storage, only)
    _print_reports(outcome.book, config.output.format, out)
    logger.info(
        f"{len(outcome.reports)} task(s) written to {config.output.directory}, "
        f"exit code {outcome.exit_code}"
    )
    return outcome.exit_code


def main(argv: Optional[Sequence[str]] = None, out: Optional[IO[str]] = None) -> int:
    """Parse argv, run the command and return the process exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        if args.command == "catalog":
            return command_catalog(args.format, out)
        if args.command == "integrate":
            return command_run(args, out, only=(TASK_INTEGRATE,))
        return command_run(args, out)
    except TangentLiftsError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
