import logging
from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.errors import InvariantViolation, StructuralError
from app.schemas.flowshop import FlowshopInstance, JobPermutation
from app.schemas.graphs import Tour, WeightMatrix
from app.schemas.solvers import ApproxRun, CycleCover, LevelRecord
from app.services.flowshop_service import INT64_SAFE, job_length, makespan
from app.services.graph_service import (
    atsp_tour_to_permutation,
    induced_submatrix,
    max_weight,
    nwfs_to_atsp,
    shortcut,
    tour_cost,
    walk_cost,
)

logger = logging.getLogger(__name__)

Arc = Tuple[int, int]


def ceil_log2(value: int) -> int:
    """Smallest k with 2**k >= value (0 for value <= 1)"""
    return max(value - 1, 0).bit_length()


# ==================== CYCLE COVERS ====================

def min_cycle_cover(matrix: WeightMatrix) -> CycleCover:
    """Exact minimum-cost cycle cover without fixed points.

    Solved as an assignment problem with the diagonal forbidden.
    """
    n = matrix.n
    if n < 2:
        raise StructuralError("a cycle cover needs at least 2 vertices")
    if n * max_weight(matrix) >= 2 ** 53:
        raise StructuralError("weights too large for an exact assignment in float64")

    costs = matrix.array.astype(np.float64)
    np.fill_diagonal(costs, np.inf)
    rows, cols = linear_sum_assignment(costs)
    return CycleCover(successor={int(u): int(v) for u, v in zip(rows, cols)})


def cover_cost(matrix: WeightMatrix, cover: CycleCover) -> int:
    w = matrix.weights
    return sum(w[u][v] for u, v in cover.successor.items())


def cycle_cover_levels(
    matrix: WeightMatrix,
    pick_representative: Callable[[Tuple[int, ...]], int],
    max_levels: Optional[int] = None,
) -> List[LevelRecord]:
    """Repeatedly cover the surviving vertices with a minimum cycle cover and
    keep one representative per cycle.

    Stops after a cover that is a single cycle, or after max_levels levels.
    Vertex numbers in the records are those of ``matrix``.
    """
    vertices = tuple(range(matrix.n))
    levels: List[LevelRecord] = []

    while max_levels is None or len(levels) < max_levels:
        local = min_cycle_cover(induced_submatrix(matrix, vertices))
        cover = CycleCover(
            successor={vertices[u]: vertices[v] for u, v in local.successor.items()}
        )
        cycles = cover.cycles()
        representatives = tuple(sorted(pick_representative(cycle) for cycle in cycles))
        level = LevelRecord(
            vertices=vertices,
            cover=cover,
            cost=cover_cost(matrix, cover),
            cycle_count=len(cycles),
            representatives=representatives,
        )
        levels.append(level)
        logger.debug(
            f"Level {len(levels) - 1}: {len(vertices)} vertices, "
            f"{len(cycles)} cycles, cover cost {level.cost}"
        )

        if 2 * len(representatives) > len(vertices):
            raise InvariantViolation("cycle cover level did not halve the vertex count")
        if len(cycles) == 1:
            break
        vertices = representatives

    return levels


# ==================== EULER WALKS ====================

def euler_circuit(arcs: Iterable[Arc], start: int) -> List[int]:
    """Closed walk using every arc of a balanced, connected multigraph once.

    Hierholzer's algorithm; at every vertex the lowest-index unused arc is taken.
    """
    out_arcs: Dict[int, List[int]] = defaultdict(list)
    balance: Dict[int, int] = defaultdict(int)
    for u, v in arcs:
        out_arcs[u].append(v)
        balance[u] += 1
        balance[v] -= 1

    if not out_arcs:
        return [start]
    unbalanced = [v for v, b in balance.items() if b != 0]
    if unbalanced:
        raise InvariantViolation(f"arc multiset is not balanced at vertices {sorted(unbalanced)}")
    if start not in out_arcs:
        raise InvariantViolation(f"start vertex {start} has no arcs")
    _check_connected(out_arcs, start)

    # Sorted descending so pop() returns the lowest head
    for heads in out_arcs.values():
        heads.sort(reverse=True)

    stack = [start]
    circuit = []
    while stack:
        vertex = stack[-1]
        if out_arcs[vertex]:
            stack.append(out_arcs[vertex].pop())
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return circuit


def _check_connected(out_arcs: Dict[int, List[int]], start: int) -> None:
    neighbours: Dict[int, set] = defaultdict(set)
    for u, heads in out_arcs.items():
        for v in heads:
            neighbours[u].add(v)
            neighbours[v].add(u)
    seen = {start}
    frontier = [start]
    while frontier:
        vertex = frontier.pop()
        for nxt in neighbours[vertex]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    if len(seen) != len(neighbours):
        raise InvariantViolation("arc multiset is not connected")


def _level_arcs(levels: Sequence[LevelRecord]) -> List[Arc]:
    return [arc for level in levels for arc in level.cover.arcs()]


# ==================== ATSP ====================

def fgm_atsp(matrix: WeightMatrix) -> Tour:
    """Repeated cycle covers, one representative (lowest index) per cycle,
    until a single cycle remains; the union is shortcut into a tour.

    Cost <= ceil(log2 n) * |OPT| on semimetric instances.
    """
    if matrix.n < 2:
        raise StructuralError("ATSP approximation needs at least 2 vertices")
    levels = cycle_cover_levels(matrix, min)
    walk = euler_circuit(_level_arcs(levels), start=0)
    tour = shortcut(matrix, walk)
    logger.info(
        f"Cycle-cover ATSP approximation: n={matrix.n}, levels={len(levels)}, "
        f"cost={tour_cost(matrix, tour)}"
    )
    return tour


def hamiltonian_on_survivors(matrix: WeightMatrix, vertices: Sequence[int]) -> Tuple[int, ...]:
    """Cycle through the survivors in index order"""
    if len(vertices) < 2:
        raise StructuralError("a Hamiltonian cycle on survivors needs at least 2 vertices")
    if max(vertices) >= matrix.n:
        raise StructuralError("survivor outside the instance")
    return tuple(sorted(vertices))


# ==================== NO-WAIT FLOWSHOP ====================

def nwfs_log_m_approx(inst: FlowshopInstance) -> Tuple[JobPermutation, ApproxRun]:
    """(ceil(log2 m) + 1)-approximation for no-wait flowshop.

    Cycle covers on the dummy-job ATSP, keeping the shortest job of every cycle,
    for at most ceil(log2 m) levels. If no level ends in a single cycle, the
    survivors (at most a 1/m share of the total processing time) are closed
    into an index-order cycle H' and added to the union before shortcutting.
    """
    matrix, trace = nwfs_to_atsp(inst)
    if matrix.n * max_weight(matrix) >= INT64_SAFE:
        raise StructuralError("instance too large for exact cycle covers")
    lengths = (0,) + tuple(job_length(job) for job in inst.jobs)
    level_cap = ceil_log2(inst.machines)

    def shortest_job(cycle: Tuple[int, ...]) -> int:
        return min(cycle, key=lambda v: (lengths[v], v))

    levels = cycle_cover_levels(matrix, shortest_job, max_levels=level_cap) if level_cap else []
    arcs = _level_arcs(levels)
    single_cycle_exit = bool(levels) and levels[-1].cycle_count == 1

    survivors: Tuple[int, ...] = ()
    hamiltonian = None
    hamiltonian_cost = None
    if not single_cycle_exit:
        survivors = levels[-1].representatives if levels else tuple(range(matrix.n))
        _check_survivor_share(inst, lengths, survivors)
        hamiltonian = hamiltonian_on_survivors(matrix, survivors)
        hamiltonian_cost = walk_cost(matrix, hamiltonian)
        if hamiltonian_cost > sum(lengths[v] for v in survivors):
            raise InvariantViolation("H' costs more than the survivors' total length")
        arcs += list(zip(hamiltonian, hamiltonian[1:] + hamiltonian[:1]))

    walk = euler_circuit(arcs, start=trace.dummy)
    tour = shortcut(matrix, walk)
    order = atsp_tour_to_permutation(trace, tour)
    value = makespan(inst, order)

    run = ApproxRun(
        machines=inst.machines,
        level_cap=level_cap,
        levels=tuple(levels),
        single_cycle_exit=single_cycle_exit,
        survivors=survivors,
        hamiltonian=hamiltonian,
        hamiltonian_cost=hamiltonian_cost,
        euler_walk=tuple(walk),
        tour=tour,
        tour_cost=tour_cost(matrix, tour),
        order=order,
        makespan=value,
        guarantee=level_cap + 1,
    )
    logger.info(
        f"log m approximation: n={inst.n}, m={inst.machines}, levels={len(levels)}, "
        f"single_cycle_exit={single_cycle_exit}, makespan={value}"
    )
    return order, run


def _check_survivor_share(
    inst: FlowshopInstance, lengths: Sequence[int], survivors: Sequence[int]
) -> None:
    # Every component of the covers' union has >= m vertices, survivors are component minima
    if inst.machines * sum(lengths[v] for v in survivors) > sum(lengths):
        raise InvariantViolation("survivors exceed a 1/m share of the total processing time")
