from pydantic import BaseModel, Field, NonNegativeInt, model_validator
from typing import List, Sequence, Tuple


class Job(BaseModel):
    """Chain of operation lengths, one per machine"""

    ops: Tuple[NonNegativeInt, ...] = Field(..., min_length=1)

    class Config:
        frozen = True

    @classmethod
    def of(cls, *ops: int) -> "Job":
        return cls(ops=ops)

    @property
    def machines(self) -> int:
        return len(self.ops)


class FlowshopInstance(BaseModel):
    jobs: Tuple[Job, ...] = Field(..., min_length=1)
    machines: int = Field(..., ge=1)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_machine_counts(self):
        for index, job in enumerate(self.jobs):
            if job.machines != self.machines:
                raise ValueError(
                    f"job {index + 1} has {job.machines} operations, expected {self.machines}"
                )
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "FlowshopInstance":
        jobs = tuple(Job(ops=tuple(row)) for row in rows)
        machines = jobs[0].machines if jobs else 0
        return cls(jobs=jobs, machines=machines)

    @property
    def n(self) -> int:
        return len(self.jobs)

    def rows(self) -> List[List[int]]:
        return [list(job.ops) for job in self.jobs]


class JobPermutation(BaseModel):
    order: Tuple[NonNegativeInt, ...] = Field(..., min_length=1)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_bijection(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"{list(self.order)} is not a permutation of 0..{len(self.order) - 1}")
        return self


class Schedule(BaseModel):
    """Start offsets of a no-wait permutation schedule"""

    order: Tuple[int, ...]
    start_times: Tuple[NonNegativeInt, ...]
    length: NonNegativeInt

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_nondecreasing(self):
        if len(self.order) != len(self.start_times):
            raise ValueError("one start time per scheduled job is required")
        if any(b < a for a, b in zip(self.start_times, self.start_times[1:])):
            raise ValueError("start times must be nondecreasing along the order")
        return self
