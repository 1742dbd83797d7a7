"""
Command line front end: classify developing maps, run the verification suite and
sample metrics on grids.

    python -m src.cli.main classify map.json --out report.json
    python -m src.cli.main verify --order 4 --out checks.json
    python -m src.cli.main sample metric.json --grid annulus --bounds 0.3 0.7 --shape 10 10
"""
import argparse
import json
import logging
import sys
from contextlib import contextmanager
from typing import Dict, List, Optional

from pydantic import ValidationError

from src.api.models import GridSpec, MapSpec, MetricSpec
from src.core.classifier import classify_singularity
from src.core.errors import SingularityError
from src.core.metrics import grid_rows
from src.core.verification import run_suite
from src.utils.config import (
    CONTINUATION_STEPS,
    DEFAULT_RADIUS,
    DEFAULT_SAMPLES,
    DEFAULT_TRUNCATION_ORDER,
    FD_STEP,
    LOG_LEVEL,
    RunConfig,
)
from src.utils.helpers import checks_to_dict, report_to_dict, write_grid_csv, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CLASSIFICATION = 2
EXIT_GRID = 2
EXIT_VERIFY_FAILED = 3

DEFAULT_ANNULUS = [0.3, 0.7]
DEFAULT_RECT = [-0.5, 0.5, 0.5, 1.5]


def _parse_tolerance(text: str) -> Dict[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return {name.strip(): float(value)}
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} is not a number: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singularity",
        description="classify isolated singularities of hyperbolic metrics from their developing maps")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=DEFAULT_TRUNCATION_ORDER, help="series truncation order N")
    common.add_argument("--radius", type=float, default=DEFAULT_RADIUS, help="sampling circle radius")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="FFT sample count (power of two >= 4N)")
    common.add_argument("--steps", type=int, default=CONTINUATION_STEPS, help="initial continuation steps")
    common.add_argument("--tol", type=_parse_tolerance, action="append", default=[], metavar="NAME=VALUE",
                        help="override a named tolerance (repeatable)")
    common.add_argument("--out", "-o", default=None, help="output file (default: standard output)")
    common.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level")

    sub = parser.add_subparsers(dest="command", required=True)
    classify = sub.add_parser("classify", parents=[common], help="classify a developing map given as JSON")
    classify.add_argument("input", help="path to a JSON map spec")

    sub.add_parser("verify", parents=[common], help="run the verification suite")

    sample = sub.add_parser("sample", parents=[common], help="sample a metric on a grid as CSV")
    sample.add_argument("input", help="path to a JSON metric spec")
    sample.add_argument("--grid", choices=["annulus", "rect"], default="annulus")
    sample.add_argument("--bounds", type=float, nargs="+", default=None,
                        help="r_min r_max for an annulus, x0 x1 y0 y1 for a rectangle")
    sample.add_argument("--shape", type=int, nargs=2, default=[20, 20])
    sample.add_argument("--step", type=float, default=FD_STEP, help="curvature stencil spacing")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    tolerances: Dict[str, float] = {}
    for item in args.tol:
        tolerances.update(item)
    return RunConfig(truncation_order=args.order, radius=args.radius, samples=args.samples,
                     continuation_steps=args.steps, tolerances=tolerances, output_path=args.out)


@contextmanager
def _output(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as handle:
            yield handle


def _read_json(path: str):
    with open(path) as handle:
        return json.load(handle)


def cmd_classify(args: argparse.Namespace, config: RunConfig) -> int:
    try:
        F = MapSpec.model_validate(_read_json(args.input)).to_spec()
    except (OSError, ValueError) as e:
        logger.error(f"Could not read map spec {args.input}: {e}")
        return EXIT_INPUT
    try:
        report = classify_singularity(F, config)
    except SingularityError as e:
        logger.error(f"Classification failed: {e}")
        return EXIT_CLASSIFICATION
    try:
        with _output(config.output_path) as out:
            write_json(report_to_dict(report), out)
    except OSError as e:
        logger.error(f"Could not write report: {e}")
        return EXIT_INPUT
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    results = run_suite(config)
    try:
        with _output(config.output_path) as out:
            write_json(checks_to_dict(results), out)
    except OSError as e:
        logger.error(f"Could not write check table: {e}")
        return EXIT_INPUT
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_sample(args: argparse.Namespace, config: RunConfig) -> int:
    try:
        metric = MetricSpec.model_validate(_read_json(args.input)).to_metric()
        bounds = args.bounds or (DEFAULT_ANNULUS if args.grid == "annulus" else DEFAULT_RECT)
        grid = GridSpec(grid=args.grid, bounds=bounds, shape=tuple(args.shape))
    except (OSError, ValueError) as e:
        logger.error(f"Could not read metric or grid: {e}")
        return EXIT_INPUT
    try:
        rows = grid_rows(metric, grid.points(), args.step)
    except ValueError as e:
        logger.error(f"Grid is not admissible: {e}")
        return EXIT_GRID
    try:
        with _output(config.output_path) as out:
            write_grid_csv(rows, out)
    except OSError as e:
        logger.error(f"Could not write grid: {e}")
        return EXIT_INPUT
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "verify": cmd_verify, "sample": cmd_sample}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level="DEBUG" if args.verbose else LOG_LEVEL, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INPUT
    return COMMANDS[args.command](args, config)


if __name__ == "__main__":
    sys.exit(main())
