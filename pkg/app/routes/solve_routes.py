import argparse
import logging

from app.errors import StructuralError
from app.routes.options import add_common, positive, vertex
from app.schemas.graphs import MatrixKind, Tour
from app.schemas.traces import TraceDocument, TraceKind
from app.services.embedding_service import solve_atsp_via_flowshop
from app.services.exact_service import exact_service
from app.services.flowshop_service import makespan
from app.services.graph_service import tour_cost
from app.services.io_service import (
    load_flowshop,
    load_matrix,
    serialize_solution,
    serialize_trace,
    write_text,
)
from app.services.solver_service import fgm_atsp, nwfs_log_m_approx

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    nwfs = add_common(subparsers.add_parser("solve-nwfs", help="schedule a no-wait flowshop instance"))
    nwfs.add_argument("file", help="flowshop instance file")
    method = nwfs.add_mutually_exclusive_group()
    method.add_argument("--exact", action="store_true", help="optimal permutation")
    method.add_argument("--approx", action="store_true", help="cycle-cover approximation (default)")
    nwfs.add_argument("--trace", help="write the approximation run to this trace file")
    nwfs.set_defaults(handler=solve_nwfs)

    atsp = add_common(subparsers.add_parser("solve-atsp", help="find a tour of an ATSP instance"))
    atsp.add_argument("file", help="matrix file")
    method = atsp.add_mutually_exclusive_group()
    method.add_argument("--exact", action="store_true", help="Held-Karp optimum")
    method.add_argument("--fgm", action="store_true", help="repeated cycle covers (default)")
    method.add_argument("--via-flowshop", action="store_true", help="through the no-wait flowshop reduction")
    atsp.add_argument("--epsilon", help="precision p/q for --via-flowshop")
    atsp.add_argument("--flowshop-solver", choices=("approx", "exact"), default="approx")
    atsp.add_argument("--replication-copies", type=positive)
    atsp.add_argument("--copies", type=positive)
    atsp.add_argument("--anchor", type=vertex)
    atsp.add_argument("--split-vertex", type=vertex)
    atsp.set_defaults(handler=solve_atsp)


def solve_nwfs(args: argparse.Namespace) -> int:
    """Print the schedule order (1-based) and its makespan"""
    inst = load_flowshop(args.file)

    if args.exact:
        if args.trace:
            raise StructuralError("--trace records approximation runs; drop it or use --approx")
        sigma = exact_service.solve_nwfs(inst)
    else:
        sigma, run = nwfs_log_m_approx(inst)
        if args.trace:
            document = TraceDocument(kind=TraceKind.approx_run, approx_run=run)
            write_text(args.trace, serialize_trace(document))

    lines = [serialize_solution("order", sigma.order), f"makespan: {makespan(inst, sigma)}"]
    write_text(args.output, "\n".join(lines))
    return 0


def solve_atsp(args: argparse.Namespace) -> int:
    """Print a tour (or path for ATSPP files) and its cost"""
    matrix = load_matrix(args.file)
    if args.epsilon and not args.via_flowshop:
        raise StructuralError("--epsilon only applies to --via-flowshop")

    if args.exact:
        route = exact_service.held_karp(matrix)
        label = "tour" if isinstance(route, Tour) else "path"
        lines = [serialize_solution(label, route.order), f"cost: {exact_service.value(matrix, route)}"]
        write_text(args.output, "\n".join(lines))
        return 0

    if matrix.kind != MatrixKind.atsp:
        raise StructuralError("only --exact solves ATSPP instances")
    if args.via_flowshop:
        if not args.epsilon:
            raise StructuralError("--via-flowshop needs --epsilon p/q")
        tour = solve_atsp_via_flowshop(
            matrix,
            args.epsilon,
            solver=args.flowshop_solver,
            replication_copies=args.replication_copies,
            copies=args.copies,
            anchor=args.anchor,
            split_vertex=args.split_vertex,
        )
    else:
        tour = fgm_atsp(matrix)

    lines = [serialize_solution("tour", tour.order), f"cost: {tour_cost(matrix, tour)}"]
    write_text(args.output, "\n".join(lines))
    return 0
