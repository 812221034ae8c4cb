import logging
import math
from itertools import combinations, islice
from typing import List, Optional, Sequence, Tuple, Union

from app.config import settings
from app.errors import InvariantViolation, StructuralError, ValidationFailure
from app.schemas.flowshop import FlowshopInstance, Job, JobPermutation
from app.schemas.graphs import HamPath, MatrixKind, Tour, WeightMatrix
from app.schemas.traces import HardnessInstance, HardnessTrace
from app.services.exact_service import solve_nwfs
from app.services.flowshop_service import as_permutation, concat_jobs, job_length
from app.services.graph_service import max_weight, path_cost, tour_cost, validate_semimetric
from app.services.solver_service import nwfs_log_m_approx
from app.services.transform_service import (
    EpsilonLike,
    as_epsilon,
    atsp_to_atspp,
    backmap_normalize_and_replicate,
    normalize_and_replicate,
    repair_and_backmap_path,
    scale_weights,
)

logger = logging.getLogger(__name__)


# ==================== SEMIMETRIC EMBEDDING ====================

def block_job(i: int, scale: int) -> Job:
    """B_i: scale - i zeros, scale ones, i zeros (2 * scale machines)"""
    if scale < 1:
        raise StructuralError(f"block scale must be positive, got {scale}")
    if not 0 <= i <= scale:
        raise StructuralError(f"block index {i} outside 0..{scale}")
    return Job(ops=(0,) * (scale - i) + (1,) * scale + (0,) * i)


def embed_semimetric(matrix: WeightMatrix, scale: Optional[int] = None) -> Tuple[Job, ...]:
    """One 0/1 job per vertex with delta(f(u), f(v)) = d(u, v) + 1 for u != v.

    f(v_i) is the concatenation of B_{d(v_i, v_1)} ... B_{d(v_i, v_n)}, all
    blocks on the common scale D (default: the heaviest arc plus one).
    delta(B_i, B_j) = min(D, max(i - j + 1, 0)), so D must exceed every arc.
    """
    report = validate_semimetric(matrix)
    if not report.ok:
        raise ValidationFailure(f"cannot embed a non-semimetric: {report.detail}")
    heaviest = max_weight(matrix)
    scale = heaviest + 1 if scale is None else scale
    if scale <= heaviest:
        raise StructuralError(f"block scale {scale} must exceed the heaviest arc {heaviest}")

    w = matrix.weights
    return tuple(
        concat_jobs([block_job(w[u][v], scale) for v in range(matrix.n)])
        for u in range(matrix.n)
    )


# ==================== GADGETS ====================

def gadget_building_blocks(scale: int) -> Tuple[Job, Job]:
    """(H0, H1): (10)^{2D} and 1^{2D} 0^{2D}"""
    if scale < 1:
        raise StructuralError(f"gadget scale must be positive, got {scale}")
    h0 = Job(ops=(1, 0) * (2 * scale))
    h1 = Job(ops=(1,) * (2 * scale) + (0,) * (2 * scale))
    return h0, h1


def gadget_half_size(count: int) -> int:
    """Smallest k >= 1 with C(2k, k) >= count"""
    k = 1
    while math.comb(2 * k, k) < count:
        k += 1
    return k


def gadget_patterns(count: int) -> Tuple[Tuple[int, ...], ...]:
    """Characteristic vectors of the first ``count`` k-subsets of 2k bits"""
    k = gadget_half_size(count)
    return tuple(
        tuple(1 if bit in subset else 0 for bit in range(2 * k))
        for subset in islice(combinations(range(2 * k), k), count)
    )


def gadget_jobs(count: int, scale: int) -> Tuple[Job, ...]:
    """Jobs with self-delta 1 and pairwise delta D, all of length 4kD"""
    if count < 1:
        raise StructuralError(f"gadget count must be positive, got {count}")
    h0, h1 = gadget_building_blocks(scale)
    return tuple(
        concat_jobs([h1 if bit else h0 for bit in pattern])
        for pattern in gadget_patterns(count)
    )


# ==================== ATSP -> NO-WAIT FLOWSHOP ====================

def build_hardness_instance(
    matrix: WeightMatrix,
    epsilon: EpsilonLike,
    replication_copies: Optional[int] = None,
    copies: Optional[int] = None,
    anchor: Optional[int] = None,
    split_vertex: Optional[int] = None,
) -> HardnessInstance:
    """No-wait flowshop instance whose optimal schedules encode optimal tours.

    Pipeline: normalize and replicate, split one vertex into a path instance
    G', scale by ceil(1/eps), take N copies of G' (cross-copy distance 2W'),
    and embed every copy with D = 2W' + 1 plus one gadget per copy.
    ``replication_copies`` and ``copies`` override ceil(2/eps) and N = n'.
    """
    eps = as_epsilon(epsilon)
    if matrix.kind != MatrixKind.atsp:
        raise StructuralError("the flowshop construction starts from an ATSP instance")
    if matrix.n < 3:
        raise StructuralError("the flowshop construction needs at least 3 vertices")
    report = validate_semimetric(matrix)
    if not report.ok:
        raise ValidationFailure(f"instance is not a semimetric: {report.detail}")

    anchor = settings.default_anchor if anchor is None else anchor
    split_vertex = settings.default_split_vertex if split_vertex is None else split_vertex

    replicated, normalization, replication = normalize_and_replicate(
        matrix, eps, copies=replication_copies, anchor=anchor
    )
    split, split_trace = atsp_to_atspp(replicated, vertex=split_vertex)
    scale = math.ceil(1 / eps)
    scaled = scale_weights(split, scale)

    n_prime = scaled.n
    w_prime = max_weight(scaled)
    copies = n_prime if copies is None else copies
    if copies < 1:
        raise StructuralError(f"copy count must be positive, got {copies}")
    block_scale = 2 * w_prime + 1

    copy_jobs = embed_semimetric(scaled, scale=block_scale)
    gadgets = gadget_jobs(copies, block_scale)
    jobs: List[Job] = []
    job_copy: List[int] = []
    job_vertex: List[int] = []
    for c, gadget in enumerate(gadgets):
        for x, job in enumerate(copy_jobs):
            jobs.append(concat_jobs([job, gadget]))
            job_copy.append(c)
            job_vertex.append(x)

    k = gadget_half_size(copies)
    length = n_prime * block_scale + 4 * k * block_scale
    if any(job_length(job) != length for job in jobs):
        raise InvariantViolation("jobs of the constructed instance differ in length")

    flowshop = FlowshopInstance(jobs=tuple(jobs), machines=jobs[0].machines)
    trace = HardnessTrace(
        epsilon=eps,
        original=matrix,
        normalization=normalization,
        replication=replication,
        split=split_trace,
        scale=scale,
        scaled=scaled,
        n_prime=n_prime,
        w_prime=w_prime,
        copies=copies,
        block_scale=block_scale,
        gadget_half_size=k,
        gadget_patterns=gadget_patterns(copies),
        job_length=length,
        job_copy=tuple(job_copy),
        job_vertex=tuple(job_vertex),
    )
    logger.info(
        f"Built flowshop instance from {matrix.n}-vertex ATSP: eps={eps}, n'={n_prime}, "
        f"W'={w_prime}, N={copies}, jobs={flowshop.n}, machines={flowshop.machines}"
    )
    return HardnessInstance(flowshop=flowshop, trace=trace)


def copy_graph_matrix(trace: HardnessTrace) -> WeightMatrix:
    """N copies of G' with every cross-copy arc weighted 2W' (free endpoints)"""
    w = trace.scaled.weights
    cross = 2 * trace.w_prime
    size = len(trace.job_copy)
    rows = [
        [
            w[trace.job_vertex[a]][trace.job_vertex[b]]
            if trace.job_copy[a] == trace.job_copy[b]
            else cross
            for b in range(size)
        ]
        for a in range(size)
    ]
    return WeightMatrix.from_rows(rows, kind=MatrixKind.atspp)


def copy_contiguous(trace: HardnessTrace, path: Sequence[int]) -> Tuple[int, ...]:
    """Group the path's vertices by copy, copies in order of first appearance,
    keeping the relative order inside each copy."""
    groups = {}
    for vertex in path:
        groups.setdefault(trace.job_copy[vertex], []).append(vertex)
    contiguous = tuple(vertex for group in groups.values() for vertex in group)

    copy_graph = copy_graph_matrix(trace)
    before, after = path_cost(copy_graph, tuple(path)), path_cost(copy_graph, contiguous)
    if after > before:
        raise InvariantViolation(
            f"making the path copy-contiguous raised its cost from {before} to {after}"
        )
    return contiguous


def predicted_optimum(trace: HardnessTrace, optimal_path_value: int) -> int:
    """Optimal makespan from the optimal path value of G'"""
    n_total = trace.copies * trace.n_prime
    return (
        trace.copies * optimal_path_value
        + 2 * trace.w_prime * (trace.copies - 1)
        + (n_total - 1)
        + trace.job_length
    )


def extract_tour(hardness: HardnessInstance, sigma: Union[JobPermutation, Sequence[int]]) -> Tour:
    """Map a schedule of the constructed instance back to a tour of the
    original ATSP instance, never losing more than the construction allows."""
    return backmap_schedule(hardness.trace, as_permutation(hardness.flowshop, sigma))


def backmap_schedule(trace: HardnessTrace, sigma: Union[JobPermutation, Sequence[int]]) -> Tour:
    """extract_tour from the recorded trace alone"""
    order = sigma.order if isinstance(sigma, JobPermutation) else tuple(sigma)
    if sorted(order) != list(range(len(trace.job_copy))):
        raise StructuralError(f"schedule is not a permutation of the {len(trace.job_copy)} jobs")

    contiguous = copy_contiguous(trace, order)
    copy_graph_cost = path_cost(copy_graph_matrix(trace), contiguous)

    best: Optional[Tuple[int, ...]] = None
    best_cost = None
    for c in range(trace.copies):
        piece = tuple(trace.job_vertex[j] for j in contiguous if trace.job_copy[j] == c)
        cost = path_cost(trace.scaled, piece)
        if best_cost is None or cost < best_cost:
            best, best_cost = piece, cost
    if trace.copies * best_cost + 2 * trace.w_prime * (trace.copies - 1) > copy_graph_cost:
        raise InvariantViolation("cheapest copy path exceeds its share of the schedule")
    logger.debug(f"Cheapest copy path costs {best_cost} in G' (schedule path {copy_graph_cost})")

    # Unscaling keeps the vertex order; only the weights shrink by the scale
    path = HamPath(order=best)
    replicated_tour = repair_and_backmap_path(trace.split, path)
    tour = backmap_normalize_and_replicate(trace.normalization, trace.replication, replicated_tour)
    logger.info(f"Extracted tour of cost {tour_cost(trace.original, tour)}")
    return tour


def solve_atsp_via_flowshop(
    matrix: WeightMatrix,
    epsilon: EpsilonLike,
    solver: str = "approx",
    **overrides,
) -> Tour:
    """Build the flowshop instance, schedule it and read back a tour.

    ``solver`` is ``approx`` (cycle-cover approximation) or ``exact``.
    """
    hardness = build_hardness_instance(matrix, epsilon, **overrides)
    if solver == "approx":
        sigma, _ = nwfs_log_m_approx(hardness.flowshop)
    elif solver == "exact":
        sigma = solve_nwfs(hardness.flowshop)
    else:
        raise StructuralError(f"unknown flowshop solver {solver!r}; use 'approx' or 'exact'")
    return extract_tour(hardness, sigma)
