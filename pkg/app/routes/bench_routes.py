import argparse
import logging

from app.errors import status
from app.routes.options import add_common, positive, seed
from app.services.bench_service import SUITES, report_to_tsv, run_suite
from app.services.io_service import write_text

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    bench = add_common(subparsers.add_parser("bench", help="run a measurement suite, TSV report"))
    bench.add_argument("--suite", choices=tuple(SUITES), default="acceptance")
    bench.add_argument("--scale", type=float, default=1.0, help="multiply the instance counts")
    bench.add_argument("--workers", type=positive, help="parallel cases (default from settings)")
    bench.add_argument("--seed", type=seed, help="master seed (default from settings)")
    bench.set_defaults(handler=bench_suite)


def bench_suite(args: argparse.Namespace) -> int:
    report = run_suite(args.suite, scale=args.scale, workers=args.workers, seed=args.seed)
    write_text(args.output, report_to_tsv(report))
    if report.failures:
        logger.error(f"{len(report.failures)} rows violate their guarantee")
        return status.EXIT_INVARIANT
    return 0
