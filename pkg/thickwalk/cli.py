"""
Command-line entry point.

    thickwalk generate --lengths 50,100 --radii 0,0.2 --samples 100 --out run1
    thickwalk analyze run1
    thickwalk knots run1 --closures 50
    thickwalk export run1
    thickwalk table1 --lengths 100,300 --radii 0,0.1,0.5,1 --proposals 100000 --out table1

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from sentry_sdk import logger as sentry_logger

from thickwalk import __version__
from thickwalk.campaign import (
    TABLE1_TOLERANCE,
    cmd_analyze,
    cmd_export,
    cmd_generate,
    cmd_knots,
    cmd_table1,
    load_manifest,
)
from thickwalk.config import load_campaign_file
from thickwalk.exceptions import InvalidConfigError, ThickWalkException
from thickwalk.models.campaign import FULL_LENGTHS, FULL_RADII, FULL_SAMPLES, campaign_from_values
from thickwalk.telemetry import configure_logging, init_sentry

logger = logging.getLogger(__name__)

USAGE_EXIT = 1
RUNTIME_EXIT = 2

TABLE1_LENGTHS = "100,300"
TABLE1_RADII = "0,0.1,0.5,1.0"
TABLE1_PROPOSALS = 100_000


class ThickWalkArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; usage errors exit with 1 here"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _int_list(field: str, value: str) -> List[int]:
    try:
        return [int(item) for item in _split(value)]
    except ValueError:
        raise InvalidConfigError(field, f"expected comma-separated integers, got {value!r}")


def _float_list(field: str, value: str) -> List[float]:
    try:
        return [float(item) for item in _split(value)]
    except ValueError:
        raise InvalidConfigError(field, f"expected comma-separated numbers, got {value!r}")


def campaign_values(args: argparse.Namespace) -> Dict[str, object]:
    """Full grid, then the campaign file, then flags; later sources win"""
    values: Dict[str, object] = {}
    if args.grid == "full":
        values.update(lengths=FULL_LENGTHS, radii=FULL_RADII, samples_per_cell=FULL_SAMPLES)
    if args.config:
        values.update(load_campaign_file(args.config))
    overrides = {
        "lengths": args.lengths and _split(args.lengths),
        "radii": args.radii and _split(args.radii),
        "samples_per_cell": args.samples,
        "chains_per_cell": args.chains,
        "seed": args.seed,
        "move_mix": args.move_mix,
        "burn_in": args.burn_in,
        "stride": args.stride,
        "knot_closures": args.closures,
        "knot_lengths": args.knot_lengths and _split(args.knot_lengths),
        "output_dir": args.out,
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return values


def run_generate(args: argparse.Namespace) -> int:
    campaign = campaign_from_values(campaign_values(args))
    manifest = cmd_generate(campaign, threads=args.threads)
    print(f"generated {len(manifest.cells)} cells in {campaign.output_dir}")
    return 0


def run_analyze(args: argparse.Namespace) -> int:
    for path in cmd_analyze(Path(args.sample_dir), out=args.out and Path(args.out)):
        print(path)
    return 0


def run_knots(args: argparse.Namespace) -> int:
    # Unset flags fall back to the campaign recorded in the sample directory's manifest
    manifest = load_manifest(Path(args.sample_dir))
    campaign = manifest.config if manifest else None
    closures = args.closures if args.closures is not None else (campaign.knot_closures if campaign else None)
    seed = args.seed if args.seed is not None else (campaign.seed if campaign else 0)
    if args.lengths:
        lengths = _int_list("lengths", args.lengths)
    else:
        lengths = campaign.knotting_lengths() if campaign else None
    written = cmd_knots(
        Path(args.sample_dir),
        closures=closures,
        seed=seed,
        out=args.out and Path(args.out),
        threads=args.threads,
        lengths=lengths,
    )
    for path in written:
        print(path)
    return 0


def run_export(args: argparse.Namespace) -> int:
    written = cmd_export(Path(args.sample_dir), out=args.out and Path(args.out))
    print(f"exported {len(written)} cells")
    return 0


def run_table1(args: argparse.Namespace) -> int:
    if args.grid == "full":
        lengths, radii = FULL_LENGTHS, FULL_RADII
    else:
        lengths = _int_list("lengths", args.lengths or TABLE1_LENGTHS)
        radii = _float_list("radii", args.radii or TABLE1_RADII)
    if args.proposals < 1:
        raise InvalidConfigError("proposals", "must be at least 1")
    written = cmd_table1(
        lengths,
        radii,
        proposals=args.proposals,
        seed=args.seed or 0,
        out=Path(args.out),
        threads=args.threads,
        burn_in=args.burn_in,
        move_mix=args.move_mix,
        tolerance=args.tolerance,
    )
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = ThickWalkArgumentParser(
        prog="thickwalk",
        description="Sample thick equilateral random walks by reflection moves and analyze their size and knotting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ThickWalkArgumentParser)

    threads = argparse.ArgumentParser(add_help=False)
    threads.add_argument("--threads", type=int, default=None, help="Worker processes (default THICKWALK_THREADS)")

    generate = commands.add_parser("generate", parents=[threads], help="Run a sampling campaign")
    generate.add_argument("--config", help="Campaign file of 'key = value' lines")
    generate.add_argument("--grid", choices=["full"], help="Full grid: lengths 100..1000, radii 0..1, 5000 samples")
    generate.add_argument("--seed", type=int)
    generate.add_argument("--lengths", help="Comma-separated edge counts")
    generate.add_argument("--radii", help="Comma-separated tube radii")
    generate.add_argument("--samples", type=int, help="Samples per (n, r) cell")
    generate.add_argument("--chains", type=int, help="Independent chains per cell")
    generate.add_argument("--move-mix", type=float, help="Probability of a single reflection move")
    generate.add_argument("--burn-in", type=int, help="Accepted moves before the first sample (default 10n)")
    generate.add_argument("--stride", type=int, help="Accepted moves between samples (default n)")
    generate.add_argument("--closures", type=int, help="Sphere closures per walk recorded for the knots command")
    generate.add_argument("--knot-lengths", help="Lengths the knots command analyzes by default")
    generate.add_argument("--out", help="Output directory")
    generate.set_defaults(handler=run_generate)

    analyze = commands.add_parser("analyze", help="Observable means and scaling exponents")
    analyze.add_argument("sample_dir")
    analyze.add_argument("--out", help="Directory for the CSV files (default: the sample directory)")
    analyze.set_defaults(handler=run_analyze)

    knots = commands.add_parser("knots", parents=[threads], help="Knot spectra of sampled walks")
    knots.add_argument("sample_dir")
    knots.add_argument("--closures", type=int, help="Sphere closures per walk")
    knots.add_argument("--seed", type=int)
    knots.add_argument("--lengths", help="Only analyze these lengths")
    knots.add_argument("--out", help="Directory for the CSV files (default: the sample directory)")
    knots.set_defaults(handler=run_knots)

    export = commands.add_parser("export", help="Convert binary samples to the text walk format")
    export.add_argument("sample_dir")
    export.add_argument("--out", help="Directory for the text files (default: <sample_dir>/export)")
    export.set_defaults(handler=run_export)

    table1 = commands.add_parser("table1", parents=[threads], help="Acceptance rates against the published table")
    table1.add_argument("--grid", choices=["full"], help="All 10 lengths and 11 radii")
    table1.add_argument("--lengths", help=f"Comma-separated edge counts (default {TABLE1_LENGTHS})")
    table1.add_argument("--radii", help=f"Comma-separated tube radii (default {TABLE1_RADII})")
    table1.add_argument("--proposals", type=int, default=TABLE1_PROPOSALS, help="Proposals per cell after burn-in")
    table1.add_argument("--seed", type=int)
    table1.add_argument("--burn-in", type=int)
    table1.add_argument("--move-mix", type=float)
    table1.add_argument("--tolerance", type=float, default=TABLE1_TOLERANCE, help="Percentage points")
    table1.add_argument("--out", default="table1")
    table1.set_defaults(handler=run_table1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    init_sentry()
    try:
        return args.handler(args)
    except ThickWalkException as exc:
        sentry_logger.error(
            'Command failed',
            attributes={
                'command.name': args.command,
                'exception.type': exc.__class__.__name__,
                'exception.message': exc.message,
                'exception.details': exc.details,
            }
        )
        logger.error(f"{exc.__class__.__name__}: {exc.message}", extra={"details": exc.details})
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        sentry_logger.error(
            'Command failed',
            attributes={
                'command.name': args.command,
                'exception.type': exc.__class__.__name__,
                'exception.message': str(exc),
            }
        )
        logger.error(f"{exc.__class__.__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT
