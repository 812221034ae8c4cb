from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, model_validator

from app.schemas.flowshop import JobPermutation
from app.schemas.graphs import Tour


class CycleCover(BaseModel):
    """Vertex-disjoint directed cycles (length >= 2) given as a successor map"""

    successor: Dict[int, int]

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_cover(self):
        if sorted(self.successor.values()) != sorted(self.successor):
            raise ValueError("every vertex needs in-degree 1 and out-degree 1")
        for vertex, nxt in self.successor.items():
            if vertex == nxt:
                raise ValueError(f"vertex {vertex} is a fixed point")
        return self

    def cycles(self) -> List[Tuple[int, ...]]:
        """Cycles ordered by their smallest vertex, each listed from it"""
        seen = set()
        cycles = []
        for start in sorted(self.successor):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            vertex = self.successor[start]
            while vertex != start:
                cycle.append(vertex)
                seen.add(vertex)
                vertex = self.successor[vertex]
            cycles.append(tuple(cycle))
        return cycles

    def arcs(self) -> List[Tuple[int, int]]:
        return sorted(self.successor.items())


class LevelRecord(BaseModel):
    vertices: Tuple[int, ...]
    cover: CycleCover
    cost: int
    cycle_count: int
    representatives: Tuple[int, ...]

    class Config:
        frozen = True


class ApproxRun(BaseModel):
    """Record of one run of the cycle-cover approximation for no-wait flowshop"""

    machines: int
    level_cap: int  # ceil(log2 m)
    levels: Tuple[LevelRecord, ...]
    single_cycle_exit: bool
    survivors: Tuple[int, ...] = ()
    hamiltonian: Optional[Tuple[int, ...]] = None  # H' on the survivors
    hamiltonian_cost: Optional[int] = None
    euler_walk: Tuple[int, ...]
    tour: Tour
    tour_cost: int
    order: JobPermutation
    makespan: int
    guarantee: int  # level_cap + 1

    class Config:
        frozen = True

    @property
    def level_costs(self) -> List[int]:
        return [level.cost for level in self.levels]
