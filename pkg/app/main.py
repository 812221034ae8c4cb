import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from app.config import settings
from app.errors import ToolkitError, status
from app.routes import bench_routes, instance_routes, reduce_routes, solve_routes
from app.routes.options import UsageParser

logger = logging.getLogger("app")


def build_parser() -> UsageParser:
    parser = UsageParser(
        prog="nowait-atsp",
        description=f"{settings.app_name} {settings.app_version}: no-wait flowshop and ATSP reductions",
    )
    parser.add_argument("--version", action="version", version=settings.app_version)
    commands = parser.add_subparsers(dest="command", required=True)

    # -------------------------
    # Include Command Routers
    # -------------------------
    solve_routes.register(commands)     # solve-nwfs, solve-atsp
    reduce_routes.register(commands)    # reduce {nwfs-to-atsp,atsp-to-nwfs}, backmap
    instance_routes.register(commands)  # embed, gen, verify
    bench_routes.register(commands)     # bench
    return parser


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose or settings.debug else settings.log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


# -------------------------
# Global Exception Handler
# -------------------------

def global_exception_handler(exc: BaseException) -> int:
    if isinstance(exc, ToolkitError):
        logger.error(exc.detail)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.status_code
    if settings.debug:
        logger.exception("Unexpected failure")
    detail = str(exc) if settings.debug else "an internal error occurred"
    print(f"error: {detail}", file=sys.stderr)
    return status.EXIT_INVARIANT


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ToolkitError as exc:
        return global_exception_handler(exc)
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)

    configure_logging(getattr(args, "verbose", False))
    try:
        return args.handler(args)
    except Exception as exc:
        return global_exception_handler(exc)


# -------------------------
# Local Dev Entry Point
# -------------------------

if __name__ == "__main__":
    sys.exit(main())
