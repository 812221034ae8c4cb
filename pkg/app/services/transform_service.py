import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from app.errors import InvariantViolation, StructuralError, ValidationFailure
from app.schemas.graphs import HamPath, MatrixKind, Tour, WeightMatrix
from app.schemas.traces import NormalizationTrace, ReplicationTrace, SplitTrace
from app.services.graph_service import (
    as_path,
    as_tour,
    max_weight,
    path_cost,
    shortcut,
    tour_cost,
    validate_semimetric,
    walk_cost,
)
from app.services.solver_service import ceil_log2, fgm_atsp

logger = logging.getLogger(__name__)

EpsilonLike = Union[Fraction, int, str]


def as_epsilon(epsilon: EpsilonLike) -> Fraction:
    """Exact rational in (0, 1]; accepts Fractions, ints and 'p/q' strings"""
    if isinstance(epsilon, float):
        raise StructuralError("epsilon must be given exactly, e.g. '1/2'")
    try:
        value = Fraction(str(epsilon).strip()) if not isinstance(epsilon, Fraction) else epsilon
    except (ValueError, ZeroDivisionError):
        raise StructuralError(f"epsilon {epsilon!r} is not a rational number")
    if not 0 < value <= 1:
        raise StructuralError(f"epsilon must lie in (0, 1], got {value}")
    return value


def _require_semimetric(matrix: WeightMatrix, what: str) -> None:
    report = validate_semimetric(matrix)
    if not report.ok:
        raise ValidationFailure(f"{what} is not a semimetric: {report.detail}")


# ==================== WEIGHT NORMALIZATION ====================

def normalize_weights(
    matrix: WeightMatrix, epsilon: EpsilonLike, certificate: int
) -> Tuple[WeightMatrix, NormalizationTrace]:
    """Round every arc up to a multiple of phi = eps * R / (n * ceil(log2 n)).

    Off-diagonal weights become ceil(d / phi) + 1, i.e. d + phi rounded up to
    the next multiple of phi and divided by phi. R is the value of a tour of
    ``matrix`` (normally the cycle-cover approximation); R = 0 uses phi = 1.
    """
    eps = as_epsilon(epsilon)
    n = matrix.n
    if n < 2:
        raise StructuralError("normalization needs at least 2 vertices")
    _require_semimetric(matrix, "instance")
    if certificate < 0:
        raise ValidationFailure(f"tour value {certificate} is negative")

    source_max = max_weight(matrix)
    if source_max > certificate:
        raise ValidationFailure(
            f"tour value {certificate} is below the heaviest arc {source_max}; "
            "it cannot be the value of a tour"
        )

    log_factor = max(ceil_log2(n), 1)
    phi = eps * certificate / (n * log_factor) if certificate > 0 else Fraction(1)

    w = matrix.weights
    rows = [
        [0 if u == v else math.ceil(w[u][v] / phi) + 1 for v in range(n)]
        for u in range(n)
    ]
    normalized = WeightMatrix.from_rows(rows)

    if max_weight(normalized) > math.ceil(certificate / phi) + 1:
        raise InvariantViolation("normalized weights exceed ceil(R / phi) + 1")
    report = validate_semimetric(normalized)
    if not report.ok:
        raise InvariantViolation(f"normalization broke the triangle inequality: {report.detail}")

    trace = NormalizationTrace(
        epsilon=eps,
        certificate=certificate,
        log_factor=log_factor,
        phi=phi,
        source_max_weight=source_max,
        source=matrix,
        normalized=normalized,
    )
    logger.debug(f"Normalized {n} vertices: phi={phi}, max weight {max_weight(normalized)}")
    return normalized, trace


# ==================== REPLICATION ====================

def replication_copies(epsilon: EpsilonLike) -> int:
    return math.ceil(2 / as_epsilon(epsilon))


def replicate_instance(
    matrix: WeightMatrix,
    epsilon: EpsilonLike,
    copies: Optional[int] = None,
    anchor: int = 0,
) -> Tuple[WeightMatrix, ReplicationTrace]:
    """N copies of the instance glued at the anchor vertex.

    The anchors merge into a supervertex U (index 0); vertex x of copy c
    is 1 + c(n - 1) + (position of x among the non-anchor vertices).
    Arcs between different copies cost d(x1, u) + d(u, x2).
    """
    n = matrix.n
    copies = replication_copies(epsilon) if copies is None else copies
    if copies < 1:
        raise StructuralError(f"copy count must be positive, got {copies}")
    if n < 2:
        raise StructuralError("replication needs at least 2 vertices")
    if not 0 <= anchor < n:
        raise StructuralError(f"anchor {anchor + 1} outside 1..{n}")

    others = [x for x in range(n) if x != anchor]
    copy_vertices = tuple(
        tuple(0 if x == anchor else 1 + c * (n - 1) + others.index(x) for x in range(n))
        for c in range(copies)
    )

    # owner[i] = (copy or None for U, base vertex)
    owner: List[Tuple[Optional[int], int]] = [(None, anchor)]
    for c in range(copies):
        owner.extend((c, x) for x in others)

    w = matrix.weights
    size = len(owner)
    rows = [[0] * size for _ in range(size)]
    for a, (ca, xa) in enumerate(owner):
        for b, (cb, xb) in enumerate(owner):
            if a == b:
                continue
            if ca is None or cb is None or ca == cb:
                rows[a][b] = w[xa][xb]
            else:
                rows[a][b] = w[xa][anchor] + w[anchor][xb]

    replicated = WeightMatrix.from_rows(rows)
    trace = ReplicationTrace(
        copies=copies,
        anchor=anchor,
        supervertex=0,
        copy_vertices=copy_vertices,
        base=matrix,
        replicated=replicated,
    )
    logger.debug(f"Replicated {n} vertices into {copies} copies ({size} vertices)")
    return replicated, trace


def backmap_replication(trace: ReplicationTrace, tour: Union[Tour, Sequence[int]]) -> Tour:
    """Tour of the base instance costing at most 1/N of the replicated tour.

    Cross-copy arcs are rerouted through U, the walk is cut at every visit
    of U, each copy's pieces are joined at the anchor and shortcut, and the
    cheapest copy wins (ties to the lowest copy).
    """
    replicated = trace.replicated
    order = as_tour(replicated, tour).rotated_to(trace.supervertex).order
    n = trace.base.n

    def copy_of(i: int) -> Optional[int]:
        return None if i == trace.supervertex else (i - 1) // (n - 1)

    base_vertex = {trace.supervertex: trace.anchor}
    for vertices in trace.copy_vertices:
        for x, i in enumerate(vertices):
            if x != trace.anchor:
                base_vertex[i] = x

    walks: List[List[int]] = [[] for _ in range(trace.copies)]
    current: Optional[int] = None
    for vertex in order:
        if vertex == trace.supervertex:
            current = None
            continue
        c = copy_of(vertex)
        if c != current:
            # entering copy c from U (possibly after a rerouted cross arc)
            walks[c].append(trace.anchor)
            current = c
        walks[c].append(base_vertex[vertex])

    total = tour_cost(replicated, order)
    best: Optional[Tour] = None
    best_cost = None
    for c, walk in enumerate(walks):
        cycle = shortcut(trace.base, walk)
        cost = tour_cost(trace.base, cycle)
        logger.debug(f"Copy {c}: walk cost {walk_cost(trace.base, walk)}, cycle cost {cost}")
        if best_cost is None or cost < best_cost:
            best, best_cost = cycle, cost

    if trace.copies * best_cost > total:
        raise InvariantViolation(
            f"cheapest copy costs {best_cost}, more than 1/{trace.copies} of {total}"
        )
    return best


# ==================== COMPOSED NORMALIZE + REPLICATE ====================

def normalize_and_replicate(
    matrix: WeightMatrix,
    epsilon: EpsilonLike,
    copies: Optional[int] = None,
    anchor: int = 0,
) -> Tuple[WeightMatrix, NormalizationTrace, ReplicationTrace]:
    """Normalize with the cycle-cover tour value as R, then replicate"""
    certificate = tour_cost(matrix, fgm_atsp(matrix)) if matrix.n >= 2 else 0
    normalized, normalization = normalize_weights(matrix, epsilon, certificate)
    replicated, replication = replicate_instance(normalized, epsilon, copies=copies, anchor=anchor)
    logger.info(
        f"Normalized and replicated: n={matrix.n}, R={certificate}, "
        f"copies={replication.copies}, vertices={replicated.n}, W={max_weight(replicated)}"
    )
    return replicated, normalization, replication


def backmap_normalize_and_replicate(
    normalization: NormalizationTrace,
    replication: ReplicationTrace,
    tour: Union[Tour, Sequence[int]],
) -> Tour:
    # Normalization keeps the vertex set; its back-map is the identity
    result = backmap_replication(replication, tour)
    logger.debug(
        f"Replication back-map: cost {tour_cost(normalization.source, result)} on the source instance"
    )
    return result


# ==================== TOUR -> PATH SPLIT ====================

def atsp_to_atspp(matrix: WeightMatrix, vertex: int = 0) -> Tuple[WeightMatrix, SplitTrace]:
    """Split ``vertex`` into v_out (keeps its index and out-arcs) and v_in
    (index n, takes its in-arcs). d(v_out, v_in) = 0; every arc not inherited
    from the tour instance costs 2W. Path endpoints are left free.
    """
    n = matrix.n
    if n < 3:
        raise StructuralError("splitting a vertex needs at least 3 vertices")
    if not 0 <= vertex < n:
        raise StructuralError(f"split vertex {vertex + 1} outside 1..{n}")

    padding = 2 * max_weight(matrix)
    v_out, v_in = vertex, n
    w = matrix.weights
    size = n + 1
    rows = [[padding] * size for _ in range(size)]
    for a in range(n):
        for b in range(n):
            if b != vertex:
                rows[a][b] = w[a][b]
        if a != vertex:
            rows[a][v_in] = w[a][vertex]
    rows[v_out][v_in] = 0
    for u in range(size):
        rows[u][u] = 0

    split = WeightMatrix.from_rows(rows, kind=MatrixKind.atspp)
    trace = SplitTrace(
        vertex=vertex, v_out=v_out, v_in=v_in, padding=padding, base=matrix, split=split
    )
    logger.debug(f"Split vertex {vertex} of {n}: padding {padding}")
    return split, trace


def repair_and_backmap_path(trace: SplitTrace, path: Union[HamPath, Sequence[int]]) -> Tour:
    """Turn any Hamiltonian path of the split instance into a tour of the base.

    Rotate so the path starts at v_out, move v_in to the end, then contract
    v_out and v_in back into one vertex. No step may raise the cost.
    """
    split = trace.split
    order = list(as_path(split, path).order)
    cost = path_cost(split, order)

    if order[0] != trace.v_out:
        cut = order.index(trace.v_out)
        order = order[cut:] + order[:cut]
        cost = _checked_step(split, order, cost, "rotation to v_out")

    if order[-1] != trace.v_in:
        order.remove(trace.v_in)
        order.append(trace.v_in)
        cost = _checked_step(split, order, cost, "moving v_in to the end")

    tour = Tour(order=tuple(order[:-1]))
    if tour_cost(trace.base, tour) > cost:
        raise InvariantViolation("contracting v_out and v_in raised the cost")
    return tour


def _checked_step(split: WeightMatrix, order: List[int], before: int, step: str) -> int:
    after = path_cost(split, order)
    if after > before:
        raise InvariantViolation(f"path repair ({step}) raised the cost from {before} to {after}")
    return after


def scale_weights(matrix: WeightMatrix, factor: int) -> WeightMatrix:
    if factor < 1:
        raise StructuralError(f"scale factor must be a positive integer, got {factor}")
    return WeightMatrix.from_rows(
        [[factor * x for x in row] for row in matrix.weights],
        kind=matrix.kind,
        source=matrix.source,
        sink=matrix.sink,
    )
