from pydantic import BaseModel
from typing import List, Optional

BENCH_COLUMNS = [
    "criterion",
    "instance_id",
    "n",
    "m",
    "algorithm",
    "value",
    "optimum",
    "ratio",
    "bound",
    "passed",
    "wall_time",
]


class BenchRow(BaseModel):
    criterion: str
    instance_id: str
    n: int
    m: int
    algorithm: str
    value: int
    optimum: Optional[int] = None
    ratio: Optional[float] = None
    bound: Optional[float] = None
    passed: bool = True
    wall_time: float = 0.0

    def cells(self) -> List[str]:
        return [
            self.criterion,
            self.instance_id,
            str(self.n),
            str(self.m),
            self.algorithm,
            str(self.value),
            "" if self.optimum is None else str(self.optimum),
            "" if self.ratio is None else f"{self.ratio:.6f}",
            "" if self.bound is None else f"{self.bound:.6f}",
            "yes" if self.passed else "no",
            f"{self.wall_time:.4f}",
        ]


class CriterionSummary(BaseModel):
    criterion: str
    rows: int
    failures: int
    max_ratio: Optional[float] = None
    mean_ratio: Optional[float] = None


class BenchReport(BaseModel):
    suite: str
    seed: int
    rows: List[BenchRow] = []
    summaries: List[CriterionSummary] = []

    @property
    def failures(self) -> List[BenchRow]:
        return [row for row in self.rows if not row.passed]
