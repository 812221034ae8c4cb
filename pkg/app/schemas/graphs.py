import enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, NonNegativeInt, model_validator


class MatrixKind(str, enum.Enum):
    atsp = "atsp"
    atspp = "atspp"


class WeightMatrix(BaseModel):
    """Square nonnegative integer distance matrix for ATSP / ATSPP instances.

    The triangle inequality is not enforced here; it is checked by
    ``graph_service.validate_semimetric`` wherever a construction relies on it.
    Path instances may designate ``source`` and ``sink``; when both are None
    the path endpoints are free.
    """

    weights: Tuple[Tuple[NonNegativeInt, ...], ...] = Field(..., min_length=1)
    kind: MatrixKind = MatrixKind.atsp
    source: Optional[NonNegativeInt] = None
    sink: Optional[NonNegativeInt] = None

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_shape(self):
        n = len(self.weights)
        for u, row in enumerate(self.weights):
            if len(row) != n:
                raise ValueError(f"row {u + 1} has {len(row)} entries, expected {n}")
        if self.kind == MatrixKind.atsp and (self.source is not None or self.sink is not None):
            raise ValueError("only ATSPP instances carry endpoints")
        if (self.source is None) != (self.sink is None):
            raise ValueError("source and sink must be designated together")
        if self.source is not None:
            if self.source >= n or self.sink >= n:
                raise ValueError("endpoint out of range")
            if self.source == self.sink:
                raise ValueError("path endpoints must be distinct")
        return self

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[int]],
        kind: MatrixKind = MatrixKind.atsp,
        source: Optional[int] = None,
        sink: Optional[int] = None,
    ) -> "WeightMatrix":
        return cls(
            weights=tuple(tuple(int(x) for x in row) for row in rows),
            kind=kind,
            source=source,
            sink=sink,
        )

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def has_endpoints(self) -> bool:
        return self.source is not None

    def weight(self, u: int, v: int) -> int:
        return self.weights[u][v]

    def rows(self) -> List[List[int]]:
        return [list(row) for row in self.weights]

    @property
    def array(self) -> np.ndarray:
        """Read-only int64 copy of the weights"""
        array = np.array(self.weights, dtype=np.int64).reshape(self.n, self.n)
        array.flags.writeable = False
        return array


class Tour(BaseModel):
    """Hamiltonian cycle, listed from an arbitrary starting vertex"""

    order: Tuple[NonNegativeInt, ...] = Field(..., min_length=1)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_permutation(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"tour {list(self.order)} does not visit every vertex exactly once")
        return self

    def rotated_to(self, vertex: int) -> "Tour":
        index = self.order.index(vertex)
        return Tour(order=self.order[index:] + self.order[:index])


class HamPath(BaseModel):
    order: Tuple[NonNegativeInt, ...] = Field(..., min_length=2)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_permutation(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"path {list(self.order)} does not visit every vertex exactly once")
        return self


class ViolationKind(str, enum.Enum):
    diagonal = "diagonal"
    triangle = "triangle"


class SemimetricReport(BaseModel):
    ok: bool
    kind: Optional[ViolationKind] = None
    # (u, w, v) with d(u, v) > d(u, w) + d(w, v); (u, u, u) for a nonzero diagonal
    triple: Optional[Tuple[int, int, int]] = None
    detail: Optional[str] = None

    class Config:
        frozen = True
