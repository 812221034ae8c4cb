import logging
from typing import Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.errors import InvariantViolation, StructuralError
from app.schemas.flowshop import FlowshopInstance, JobPermutation
from app.schemas.graphs import (
    HamPath,
    MatrixKind,
    SemimetricReport,
    Tour,
    ViolationKind,
    WeightMatrix,
)
from app.schemas.traces import NwfsAtspTrace
from app.services.flowshop_service import delta_matrix

logger = logging.getLogger(__name__)

TourLike = Union[Tour, Sequence[int]]
PathLike = Union[HamPath, Sequence[int]]


def as_tour(matrix: WeightMatrix, tour: TourLike) -> Tour:
    order = tour.order if isinstance(tour, Tour) else tuple(tour)
    if len(order) != matrix.n:
        raise StructuralError(f"tour visits {len(order)} vertices, instance has {matrix.n}")
    try:
        return tour if isinstance(tour, Tour) else Tour(order=order)
    except ValidationError:
        raise StructuralError(f"{list(order)} is not a tour of the {matrix.n} vertices")


def as_path(matrix: WeightMatrix, path: PathLike) -> HamPath:
    order = path.order if isinstance(path, HamPath) else tuple(path)
    if len(order) != matrix.n:
        raise StructuralError(f"path visits {len(order)} vertices, instance has {matrix.n}")
    try:
        return path if isinstance(path, HamPath) else HamPath(order=order)
    except ValidationError:
        raise StructuralError(f"{list(order)} is not a Hamiltonian path of the {matrix.n} vertices")


def max_weight(matrix: WeightMatrix) -> int:
    return max(max(row) for row in matrix.weights)


def validate_semimetric(matrix: WeightMatrix) -> SemimetricReport:
    """Zero diagonal and triangle inequality; reports the lexicographically
    first violating triple (u, w, v) with d(u, v) > d(u, w) + d(w, v)."""
    d = matrix.array
    for u in range(matrix.n):
        if d[u, u] != 0:
            return SemimetricReport(
                ok=False,
                kind=ViolationKind.diagonal,
                triple=(u, u, u),
                detail=f"d({u},{u}) = {d[u, u]} is not 0",
            )

    for u in range(matrix.n):
        # broken[w, v]: d(u, v) > d(u, w) + d(w, v)
        broken = d[u][None, :] > d[u][:, None] + d
        hits = np.argwhere(broken)
        if len(hits):
            w, v = (int(x) for x in hits[0])
            return SemimetricReport(
                ok=False,
                kind=ViolationKind.triangle,
                triple=(u, w, v),
                detail=f"d({u},{v}) = {d[u, v]} > d({u},{w}) + d({w},{v}) = {d[u, w] + d[w, v]}",
            )
    return SemimetricReport(ok=True)


def walk_cost(matrix: WeightMatrix, walk: Sequence[int]) -> int:
    """Cost of a closed walk; the closing arc is free when the walk ends where it starts"""
    if not walk:
        return 0
    w = matrix.weights
    return sum(w[a][b] for a, b in zip(walk, walk[1:])) + w[walk[-1]][walk[0]]


def tour_cost(matrix: WeightMatrix, tour: TourLike) -> int:
    return walk_cost(matrix, as_tour(matrix, tour).order)


def path_cost(matrix: WeightMatrix, path: PathLike) -> int:
    order = as_path(matrix, path).order
    w = matrix.weights
    return sum(w[a][b] for a, b in zip(order, order[1:]))


def shortcut(matrix: WeightMatrix, walk: Sequence[int]) -> Tour:
    """Keep the first visit of every vertex of a closed walk"""
    missing = set(range(matrix.n)) - set(walk)
    if missing:
        raise StructuralError(f"walk never visits vertices {sorted(missing)}")
    order = tuple(dict.fromkeys(walk))
    tour = Tour(order=order)

    before, after = walk_cost(matrix, walk), walk_cost(matrix, order)
    if after > before:
        raise InvariantViolation(
            f"shortcutting raised the cost from {before} to {after}; "
            "the instance violates the triangle inequality"
        )
    return tour


def induced_submatrix(matrix: WeightMatrix, vertices: Sequence[int]) -> WeightMatrix:
    w = matrix.weights
    return WeightMatrix.from_rows([[w[u][v] for v in vertices] for u in vertices])


def nwfs_to_atsp(inst: FlowshopInstance) -> Tuple[WeightMatrix, NwfsAtspTrace]:
    """ATSP instance whose optimal tour value is the optimal makespan.

    Vertex 0 is an all-zero dummy job; vertex j + 1 is job j. delta(i, i) is set to 0.
    """
    deltas = delta_matrix(inst)
    lengths = [sum(job.ops) for job in inst.jobs]
    size = inst.n + 1

    rows = [[0] * size for _ in range(size)]
    for i in range(inst.n):
        # delta(job, dummy) = L(job); delta(dummy, job) = 0
        rows[i + 1][0] = lengths[i]
        for j in range(inst.n):
            if i != j:
                rows[i + 1][j + 1] = deltas[i][j]

    logger.debug(f"Reduced {inst.n} jobs on {inst.machines} machines to a {size}-vertex ATSP")
    return WeightMatrix.from_rows(rows), NwfsAtspTrace(instance=inst, dummy=0)


def atsp_tour_to_permutation(trace: NwfsAtspTrace, tour: TourLike) -> JobPermutation:
    order = tour.order if isinstance(tour, Tour) else tuple(tour)
    if trace.dummy not in order:
        raise StructuralError("tour does not contain the dummy vertex")
    if sorted(order) != list(range(trace.instance.n + 1)):
        raise StructuralError(f"{list(order)} is not a tour of the reduced instance")
    start = order.index(trace.dummy)
    rotated = order[start + 1:] + order[:start]
    return JobPermutation(order=tuple(v - 1 for v in rotated))


def free_path_instance(matrix: WeightMatrix) -> WeightMatrix:
    """Same weights, as an ATSPP with free endpoints"""
    return WeightMatrix(weights=matrix.weights, kind=MatrixKind.atspp)
