"""
qforge command line: ``qforge <stage> [options]`` and ``qforge diff A B``.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .config import load_settings, override
from .errors import InputError
from .pipeline import ALL, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_INTERNAL, EXIT_PASS, STAGES, PipelineConfig, run
from .report import canonical_json, diff_reports, render_text

logger = logging.getLogger(__name__)


def _stage_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    source = parent.add_mutually_exclusive_group()
    source.add_argument("--case", type=str, help="Case id (e.g. d5-to-e6) or all-nine")
    source.add_argument("--rep", type=str, help="Representation diagram JSON, or a bundled name")
    parent.add_argument("--cases-file", type=str, help="Case file to use instead of the bundled one")
    parent.add_argument("--claims", type=str, help="m± claims JSON, or a bundled name")
    parent.add_argument("--check", type=str, help="full or sampled:N (default depends on dimension)")
    parent.add_argument("--full", action="store_true", help="Same as --check full")
    parent.add_argument("--seed", type=int, help="Seed for Krylov vectors and sampled columns")
    parent.add_argument("--eigen", type=str, help="Normalization eigenvalue: auto or an exponent a/b")
    parent.add_argument("--rprime-form", choices=["closed", "generic"], help="R' used by later stages")
    parent.add_argument("--serre-sides", type=str, help="Comma-separated Serre sides, e.g. E,F")
    parent.add_argument("--threads", type=int, help="Workers for column checks")
    parent.add_argument("--out", type=str, help="Write the JSON report here")
    parent.add_argument("--dump-rmatrix", type=str, metavar="DIR", help="Export R_VV entries to DIR")
    parent.add_argument("--format", choices=["json", "text"], default="json", help="Report printed on stdout")
    parent.add_argument("--config", type=str, help="Settings YAML (default: bundled qforge.yaml)")
    parent.add_argument("--log-level", type=str, help="Logging level")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qforge",
        description="Exact verification of rank-raising inductions of quantum groups",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    parent = _stage_options()
    for stage in STAGES + (ALL,):
        commands.add_parser(stage, parents=[parent], help=f"Run the {stage} stage and its prerequisites")
    diff = commands.add_parser("diff", help="Compare two reports field by field")
    diff.add_argument("a", type=str, help="First report JSON")
    diff.add_argument("b", type=str, help="Second report JSON")
    return parser


def _run_diff(args: argparse.Namespace) -> int:
    try:
        paths = diff_reports(args.a, args.b)
    except InputError as e:
        logger.error(f"Diff failed: {e}")
        return EXIT_INPUT
    for path in paths:
        print(path)
    return EXIT_PASS if not paths else EXIT_CHECK_FAILED


def _run_stages(args: argparse.Namespace) -> int:
    try:
        settings = load_settings(args.config)
    except InputError as e:
        logger.error(f"{e}")
        return EXIT_INPUT
    sides = [s.strip() for s in args.serre_sides.split(",")] if args.serre_sides else None
    try:
        settings = override(
            settings,
            seed=args.seed,
            eigen=args.eigen,
            threads=args.threads,
            rprime_form=args.rprime_form,
            serre_sides=sides,
            log_level=args.log_level,
        )
    except ValidationError as e:
        logger.error(f"Invalid option: {e}")
        return EXIT_INPUT
    logging.getLogger().setLevel(settings.log_level.upper())

    try:
        config = PipelineConfig(
            stages=[args.command],
            case=args.case,
            cases_file=args.cases_file,
            rep=args.rep,
            claims=args.claims,
            check="full" if args.full else args.check,
            out=args.out,
            dump_dir=args.dump_rmatrix,
            settings=settings,
        )
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_INPUT

    report, code = run(config)
    if args.format == "text":
        print(render_text(report, settings.report_template))
    else:
        print(json.dumps(json.loads(canonical_json(report)), indent=2, ensure_ascii=False))
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI function"""
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "diff":
            return _run_diff(args)
        return _run_stages(args)
    except Exception as e:
        logger.exception(f"qforge failed: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
