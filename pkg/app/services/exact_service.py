import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from app.config import settings
from app.errors import LimitExceededError, StructuralError
from app.schemas.flowshop import FlowshopInstance, JobPermutation
from app.schemas.graphs import HamPath, MatrixKind, Tour, WeightMatrix
from app.services.flowshop_service import INT64_SAFE, delta_matrix, job_length, makespan
from app.services.graph_service import (
    atsp_tour_to_permutation,
    max_weight,
    nwfs_to_atsp,
    path_cost,
    tour_cost,
)

logger = logging.getLogger(__name__)

UNREACHED = np.iinfo(np.int64).max // 4


class ExactService:
    """Exponential-time oracles for desk-size instances"""

    def __init__(self):
        self.held_karp_limit = settings.held_karp_limit
        self.brute_force_limit = settings.brute_force_limit

    # -------------------------
    # Held-Karp
    # -------------------------

    def held_karp(
        self,
        matrix: WeightMatrix,
        limit: Optional[int] = None,
        use_endpoints: bool = True,
    ) -> Union[Tour, HamPath]:
        """Optimal tour (ATSP) or Hamiltonian path (ATSPP) by subset DP.

        ATSPP instances with designated endpoints are solved source -> sink
        unless use_endpoints is False; otherwise all endpoint pairs are tried.
        """
        limit = self.held_karp_limit if limit is None else limit
        n = matrix.n
        if n > limit:
            raise LimitExceededError(
                f"Held-Karp limited to {limit} vertices, instance has {n}"
            )
        if n * max(max_weight(matrix), 1) >= INT64_SAFE:
            raise StructuralError("weights too large for the int64 Held-Karp table")

        is_path = matrix.kind == MatrixKind.atspp
        if not is_path and n == 1:
            return Tour(order=(0,))
        if is_path and n < 2:
            raise StructuralError("a Hamiltonian path needs at least 2 vertices")

        if is_path and use_endpoints and matrix.has_endpoints:
            starts, end = [matrix.source], matrix.sink
        elif is_path:
            starts, end = list(range(n)), None
        else:
            starts, end = [0], None

        d = matrix.array
        table = self._fill_table(d, starts)
        full = (1 << n) - 1

        if not is_path:
            closing = table[full] + d[:, 0]
            closing[0] = UNREACHED
            last = int(np.argmin(closing))
        elif end is not None:
            last = end
        else:
            last = int(np.argmin(table[full]))

        order = self._backtrack(d, table, last)
        result = Tour(order=tuple(order)) if not is_path else HamPath(order=tuple(order))
        logger.debug(f"Held-Karp optimum on {n} vertices: {self.value(matrix, result)}")
        return result

    def held_karp_value(
        self, matrix: WeightMatrix, limit: Optional[int] = None, use_endpoints: bool = True
    ) -> int:
        return self.value(matrix, self.held_karp(matrix, limit=limit, use_endpoints=use_endpoints))

    @staticmethod
    def value(matrix: WeightMatrix, route: Union[Tour, HamPath]) -> int:
        if isinstance(route, Tour):
            return tour_cost(matrix, route)
        return path_cost(matrix, route)

    @staticmethod
    def _fill_table(d: np.ndarray, starts: List[int]) -> np.ndarray:
        """table[mask, j]: cheapest path from a start through mask ending at j"""
        n = d.shape[0]
        table = np.full((1 << n, n), UNREACHED, dtype=np.int64)
        for s in starts:
            table[1 << s, s] = 0
        bits = np.arange(n)

        for mask in range(1, 1 << n):
            row = table[mask]
            if row.min() >= UNREACHED:
                continue
            # best[j] = min over i of row[i] + d[i, j]
            best = (row[:, None] + d).min(axis=0)
            outside = bits[((mask >> bits) & 1) == 0]
            if len(outside) == 0:
                continue
            targets = mask | (1 << outside)
            table[targets, outside] = np.minimum(table[targets, outside], best[outside])
        return table

    @staticmethod
    def _backtrack(d: np.ndarray, table: np.ndarray, last: int) -> List[int]:
        n = d.shape[0]
        mask = (1 << n) - 1
        order = [last]
        while mask != (1 << last):
            previous_mask = mask ^ (1 << last)
            value = table[mask, last]
            candidates = [
                i for i in range(n)
                if (previous_mask >> i) & 1 and table[previous_mask, i] + d[i, last] == value
            ]
            if not candidates:
                raise StructuralError("Held-Karp table is inconsistent")
            last, mask = candidates[0], previous_mask
            order.append(last)
        order.reverse()
        return order

    # -------------------------
    # Permutation enumeration
    # -------------------------

    def brute_force_nwfs(
        self, inst: FlowshopInstance, limit: Optional[int] = None
    ) -> JobPermutation:
        """Minimum-makespan permutation by exhaustive search.

        Branches whose partial value cannot beat the incumbent are cut; the
        first optimal permutation in lexicographic order is returned.
        """
        limit = self.brute_force_limit if limit is None else limit
        if inst.n > limit:
            raise LimitExceededError(
                f"permutation enumeration limited to {limit} jobs, instance has {inst.n}"
            )
        d = delta_matrix(inst)
        lengths = [job_length(job) for job in inst.jobs]
        best: List = [None, None]  # value, order

        def extend(order: List[int], remaining: List[int], partial: int) -> None:
            if not remaining:
                value = partial + lengths[order[-1]]
                if best[0] is None or value < best[0]:
                    best[0], best[1] = value, tuple(order)
                return
            for index, job in enumerate(remaining):
                step = d[order[-1]][job] if order else 0
                if best[0] is not None and partial + step + min(lengths) >= best[0]:
                    continue
                order.append(job)
                extend(order, remaining[:index] + remaining[index + 1:], partial + step)
                order.pop()

        extend([], list(range(inst.n)), 0)
        logger.debug(f"Brute-force optimum for {inst.n} jobs: {best[0]}")
        return JobPermutation(order=best[1])

    def solve_nwfs(self, inst: FlowshopInstance) -> JobPermutation:
        """Optimal permutation: enumeration for small n, otherwise Held-Karp
        on the dummy-job ATSP (one vertex more than there are jobs)."""
        if inst.n <= self.brute_force_limit:
            return self.brute_force_nwfs(inst)
        matrix, trace = nwfs_to_atsp(inst)
        return atsp_tour_to_permutation(trace, self.held_karp(matrix))

    def optimal_makespan(self, inst: FlowshopInstance) -> Tuple[JobPermutation, int]:
        sigma = self.solve_nwfs(inst)
        return sigma, makespan(inst, sigma)


# Create singleton instance
exact_service = ExactService()


def held_karp(matrix: WeightMatrix, limit: Optional[int] = None, use_endpoints: bool = True):
    return exact_service.held_karp(matrix, limit=limit, use_endpoints=use_endpoints)


def held_karp_value(matrix: WeightMatrix, limit: Optional[int] = None, use_endpoints: bool = True) -> int:
    return exact_service.held_karp_value(matrix, limit=limit, use_endpoints=use_endpoints)


def brute_force_nwfs(inst: FlowshopInstance, limit: Optional[int] = None) -> JobPermutation:
    return exact_service.brute_force_nwfs(inst, limit=limit)


def solve_nwfs(inst: FlowshopInstance) -> JobPermutation:
    return exact_service.solve_nwfs(inst)
