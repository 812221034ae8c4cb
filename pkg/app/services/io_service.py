import logging
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from app.errors import ParseError
from app.schemas.flowshop import FlowshopInstance
from app.schemas.graphs import MatrixKind, WeightMatrix
from app.schemas.traces import TraceDocument

logger = logging.getLogger(__name__)

SOLUTION_LABELS = ("order", "tour", "path")

PathLike = Union[str, Path]


def read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}")


def write_text(path: Optional[PathLike], text: str) -> None:
    """Write to ``path``, or print when path is None"""
    if path is None:
        print(text, end="" if text.endswith("\n") else "\n")
        return
    Path(path).write_text(text if text.endswith("\n") else text + "\n")
    logger.debug(f"Wrote {path}")


def _content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    """(1-based line number, tokens) of every non-blank, non-comment line"""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            yield number, stripped.split()


def _integers(tokens: Sequence[str], line: int, minimum: int = 0) -> List[int]:
    values = []
    for token in tokens:
        try:
            value = int(token)
        except ValueError:
            raise ParseError(f"expected an integer, found {token!r}", line)
        if value < minimum:
            raise ParseError(f"expected an integer >= {minimum}, found {value}", line)
        values.append(value)
    return values


# ==================== FLOWSHOP INSTANCES ====================

def parse_flowshop(text: str) -> FlowshopInstance:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty flowshop file")
    number, header = lines[0]
    if len(header) != 2:
        raise ParseError("header must be 'n m'", number)
    n, m = _integers(header, number, minimum=1)

    rows = lines[1:]
    if len(rows) != n:
        last = rows[-1][0] if rows else number
        raise ParseError(f"expected {n} job lines, found {len(rows)}", last)
    jobs = []
    for number, tokens in rows:
        if len(tokens) != m:
            raise ParseError(f"expected {m} operation lengths, found {len(tokens)}", number)
        jobs.append(_integers(tokens, number))
    return FlowshopInstance.from_rows(jobs)


def serialize_flowshop(inst: FlowshopInstance) -> str:
    lines = [f"{inst.n} {inst.machines}"]
    lines.extend(" ".join(str(t) for t in job.ops) for job in inst.jobs)
    return "\n".join(lines) + "\n"


def load_flowshop(path: PathLike) -> FlowshopInstance:
    return parse_flowshop(read_text(path))


# ==================== WEIGHT MATRICES ====================

def parse_matrix(text: str) -> WeightMatrix:
    """'n' then n rows, optionally preceded by 'ATSPP' or 'ATSPP source sink'
    (1-based endpoints)."""
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty matrix file")

    kind, source, sink = MatrixKind.atsp, None, None
    number, tokens = lines[0]
    if tokens[0].upper() == "ATSPP":
        kind = MatrixKind.atspp
        if len(tokens) == 3:
            source, sink = (v - 1 for v in _integers(tokens[1:], number, minimum=1))
        elif len(tokens) != 1:
            raise ParseError("path header must be 'ATSPP' or 'ATSPP source sink'", number)
        lines = lines[1:]
        if not lines:
            raise ParseError("missing size line after the ATSPP header", number)
        number, tokens = lines[0]

    if len(tokens) != 1:
        raise ParseError("size line must hold a single integer n", number)
    (n,) = _integers(tokens, number, minimum=1)
    rows = lines[1:]
    if len(rows) != n:
        last = rows[-1][0] if rows else number
        raise ParseError(f"expected {n} matrix rows, found {len(rows)}", last)

    weights = []
    for number, tokens in rows:
        if len(tokens) != n:
            raise ParseError(f"expected {n} entries, found {len(tokens)}", number)
        weights.append(_integers(tokens, number))

    try:
        return WeightMatrix.from_rows(weights, kind=kind, source=source, sink=sink)
    except ValidationError as exc:
        raise ParseError(exc.errors()[0]["msg"], lines[0][0])


def serialize_matrix(matrix: WeightMatrix) -> str:
    lines = []
    if matrix.kind == MatrixKind.atspp:
        if matrix.has_endpoints:
            lines.append(f"ATSPP {matrix.source + 1} {matrix.sink + 1}")
        else:
            lines.append("ATSPP")
    lines.append(str(matrix.n))
    lines.extend(" ".join(str(x) for x in row) for row in matrix.weights)
    return "\n".join(lines) + "\n"


def load_matrix(path: PathLike) -> WeightMatrix:
    return parse_matrix(read_text(path))


# ==================== SOLUTIONS ====================

def parse_solution(text: str) -> Tuple[Optional[str], Tuple[int, ...]]:
    """First solution line as (label or None, 0-based indices).

    Accepts 'order: 2 1', 'tour: ...', 'path: ...' or bare 1-based integers.
    Other labelled lines (e.g. 'makespan: 7') are skipped.
    """
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        label = None
        if ":" in stripped:
            label, _, rest = stripped.partition(":")
            label = label.strip().lower()
            if label not in SOLUTION_LABELS:
                continue
            stripped = rest
        values = _integers(stripped.split(), number, minimum=1)
        if not values:
            raise ParseError("solution line lists no vertices", number)
        return label, tuple(v - 1 for v in values)
    raise ParseError("no solution line found")


def serialize_solution(label: str, order: Sequence[int]) -> str:
    return f"{label}: " + " ".join(str(v + 1) for v in order)


def load_solution(path: PathLike) -> Tuple[Optional[str], Tuple[int, ...]]:
    return parse_solution(read_text(path))


# ==================== TRACE DOCUMENTS ====================

def parse_trace(text: str) -> TraceDocument:
    try:
        return TraceDocument.model_validate_json(text)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise ParseError(f"invalid trace document at {location or 'top level'}: {error['msg']}")


def serialize_trace(document: TraceDocument) -> str:
    return document.model_dump_json(indent=2, exclude_none=True) + "\n"


def load_trace(path: PathLike) -> TraceDocument:
    return parse_trace(read_text(path))
