import argparse
import logging

from app.errors import StructuralError
from app.routes.options import add_common, positive, vertex
from app.schemas.traces import TraceDocument, TraceKind
from app.services.embedding_service import backmap_schedule, build_hardness_instance
from app.services.flowshop_service import makespan
from app.services.graph_service import atsp_tour_to_permutation, nwfs_to_atsp, tour_cost
from app.services.io_service import (
    load_flowshop,
    load_matrix,
    load_solution,
    load_trace,
    serialize_flowshop,
    serialize_matrix,
    serialize_solution,
    serialize_trace,
    write_text,
)

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    reduce = subparsers.add_parser("reduce", help="translate instances between the two problems")
    directions = reduce.add_subparsers(dest="direction", required=True)

    to_atsp = add_common(directions.add_parser("nwfs-to-atsp", help="flowshop -> ATSP (dummy job is vertex 1)"))
    to_atsp.add_argument("file", help="flowshop instance file")
    to_atsp.add_argument("--trace", help="write the reduction trace to this file")
    to_atsp.set_defaults(handler=reduce_nwfs_to_atsp)

    to_nwfs = add_common(directions.add_parser("atsp-to-nwfs", help="ATSP -> no-wait flowshop"))
    to_nwfs.add_argument("file", help="matrix file")
    to_nwfs.add_argument("--epsilon", required=True, help="precision p/q in (0, 1]")
    to_nwfs.add_argument("--replication-copies", type=positive, help="override ceil(2/epsilon)")
    to_nwfs.add_argument("--copies", type=positive, help="override the number of copies of G'")
    to_nwfs.add_argument("--anchor", type=vertex, help="replication anchor (1-based)")
    to_nwfs.add_argument("--split-vertex", type=vertex, help="vertex split into v_out/v_in (1-based)")
    to_nwfs.add_argument("--trace", help="write the construction trace to this file")
    to_nwfs.set_defaults(handler=reduce_atsp_to_nwfs)

    backmap = add_common(subparsers.add_parser("backmap", help="map a solution back through a trace"))
    backmap.add_argument("trace", help="trace file written by reduce")
    backmap.add_argument("solution", help="solution file of the reduced instance")
    backmap.set_defaults(handler=apply_backmap)


def reduce_nwfs_to_atsp(args: argparse.Namespace) -> int:
    inst = load_flowshop(args.file)
    matrix, trace = nwfs_to_atsp(inst)
    if args.trace:
        write_text(args.trace, serialize_trace(TraceDocument(kind=TraceKind.nwfs_to_atsp, nwfs_to_atsp=trace)))
    write_text(args.output, serialize_matrix(matrix))
    return 0


def reduce_atsp_to_nwfs(args: argparse.Namespace) -> int:
    matrix = load_matrix(args.file)
    hardness = build_hardness_instance(
        matrix,
        args.epsilon,
        replication_copies=args.replication_copies,
        copies=args.copies,
        anchor=args.anchor,
        split_vertex=args.split_vertex,
    )
    if args.trace:
        document = TraceDocument(kind=TraceKind.atsp_to_nwfs, hardness=hardness.trace)
        write_text(args.trace, serialize_trace(document))
    write_text(args.output, serialize_flowshop(hardness.flowshop))
    return 0


def apply_backmap(args: argparse.Namespace) -> int:
    """Replay the back-map recorded in a trace on a solution file"""
    document = load_trace(args.trace)
    _, order = load_solution(args.solution)

    if document.kind == TraceKind.nwfs_to_atsp and document.nwfs_to_atsp is not None:
        trace = document.nwfs_to_atsp
        sigma = atsp_tour_to_permutation(trace, order)
        lines = [serialize_solution("order", sigma.order), f"makespan: {makespan(trace.instance, sigma)}"]
    elif document.kind == TraceKind.atsp_to_nwfs and document.hardness is not None:
        trace = document.hardness
        tour = backmap_schedule(trace, order)
        lines = [serialize_solution("tour", tour.order), f"cost: {tour_cost(trace.original, tour)}"]
    else:
        raise StructuralError(f"a {document.kind.value} trace has no back-map")

    write_text(args.output, "\n".join(lines))
    return 0
