import argparse
import logging

from app.errors import ParseError, status
from app.routes.options import add_common, positive, seed
from app.schemas.flowshop import FlowshopInstance
from app.services.embedding_service import embed_semimetric
from app.services.flowshop_service import machine_load_lower_bound, validate_instance
from app.services.generator_service import gen_random_flowshop, gen_random_semimetric
from app.services.graph_service import validate_semimetric
from app.services.io_service import (
    parse_flowshop,
    parse_matrix,
    read_text,
    serialize_flowshop,
    serialize_matrix,
    write_text,
)

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    embed = add_common(subparsers.add_parser("embed", help="embed a semimetric as 0/1 jobs"))
    embed.add_argument("file", help="matrix file")
    embed.add_argument("--scale", type=positive, help="block scale D, above every arc (default: heaviest arc + 1)")
    embed.set_defaults(handler=embed_matrix)

    gen = add_common(subparsers.add_parser("gen", help="generate a random instance"))
    gen.add_argument("kind", choices=("atsp", "nwfs"))
    gen.add_argument("--n", type=positive, required=True, help="vertices or jobs")
    gen.add_argument("--m", type=positive, default=3, help="machines (nwfs only)")
    gen.add_argument("--max-weight", type=int, default=9, help="largest arc weight or operation length")
    gen.add_argument("--seed", type=seed, default=0)
    gen.set_defaults(handler=generate)

    verify = add_common(subparsers.add_parser("verify", help="validate an instance file"))
    verify.add_argument("file", help="matrix or flowshop instance file")
    verify.set_defaults(handler=verify_file)


def embed_matrix(args: argparse.Namespace) -> int:
    matrix = parse_matrix(read_text(args.file))
    jobs = embed_semimetric(matrix, scale=args.scale)
    write_text(args.output, serialize_flowshop(FlowshopInstance(jobs=jobs, machines=jobs[0].machines)))
    return 0


def generate(args: argparse.Namespace) -> int:
    if args.kind == "atsp":
        text = serialize_matrix(gen_random_semimetric(args.n, args.max_weight, args.seed))
    else:
        text = serialize_flowshop(gen_random_flowshop(args.n, args.m, args.max_weight, args.seed))
    write_text(args.output, text)
    return 0


def verify_file(args: argparse.Namespace) -> int:
    """Flowshop files have an 'n m' header; everything else is read as a matrix"""
    text = read_text(args.file)
    if _looks_like_flowshop(text):
        inst = parse_flowshop(text)
        issues = validate_instance(inst)
        if issues:
            write_text(args.output, "\n".join(f"issue: {issue}" for issue in issues))
            return status.EXIT_VALIDATION
        write_text(
            args.output,
            f"ok: flowshop instance with {inst.n} jobs on {inst.machines} machines\n"
            f"lower bound: {machine_load_lower_bound(inst)}",
        )
        return 0

    matrix = parse_matrix(text)
    report = validate_semimetric(matrix)
    if not report.ok:
        u, w, v = (x + 1 for x in report.triple)
        write_text(args.output, f"violation: {report.kind.value} at vertices {u} {w} {v}")
        return status.EXIT_VALIDATION
    write_text(args.output, f"ok: {matrix.kind.value} semimetric on {matrix.n} vertices")
    return 0


def _looks_like_flowshop(text: str) -> bool:
    for line in text.splitlines():
        tokens = line.split("#", 1)[0].split()
        if tokens:
            return len(tokens) == 2 and tokens[0].upper() != "ATSPP"
    raise ParseError("empty instance file")
