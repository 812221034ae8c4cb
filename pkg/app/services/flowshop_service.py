import logging
from itertools import chain
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.errors import StructuralError
from app.schemas.flowshop import FlowshopInstance, Job, JobPermutation, Schedule

logger = logging.getLogger(__name__)

# Vectorised kernels work in int64; keep every prefix sum well inside it
INT64_SAFE = 2 ** 62

JobLike = Union[Job, Sequence[int]]
PermutationLike = Union[JobPermutation, Sequence[int]]


def as_job(job: JobLike) -> Job:
    if isinstance(job, Job):
        return job
    try:
        return Job(ops=tuple(job))
    except ValidationError as exc:
        raise StructuralError(f"invalid job {list(job)}: {exc.errors()[0]['msg']}")


def as_permutation(inst: FlowshopInstance, sigma: PermutationLike) -> Tuple[int, ...]:
    """Validate sigma against inst and return its job order"""
    order = sigma.order if isinstance(sigma, JobPermutation) else tuple(sigma)
    if sorted(order) != list(range(inst.n)):
        raise StructuralError(f"{list(order)} is not a permutation of the {inst.n} jobs")
    return tuple(order)


def delta(a: JobLike, b: JobLike) -> int:
    """Minimum start-to-start gap when job b directly follows job a.

    max over q of (t_a1 + ... + t_aq) - (t_b1 + ... + t_b(q-1))
    """
    a, b = as_job(a), as_job(b)
    if a.machines != b.machines:
        raise StructuralError(
            f"jobs have different machine counts ({a.machines} and {b.machines})"
        )
    finished_a = 0
    started_b = 0
    gap = a.ops[0]
    for t_a, t_b in zip(a.ops, b.ops):
        finished_a += t_a
        gap = max(gap, finished_a - started_b)
        started_b += t_b
    return gap


def job_length(a: JobLike) -> int:
    return sum(as_job(a).ops)


def makespan(inst: FlowshopInstance, sigma: PermutationLike) -> int:
    """C_max of the no-wait schedule processing jobs in order sigma"""
    order = as_permutation(inst, sigma)
    jobs = inst.jobs
    total = sum(delta(jobs[i], jobs[j]) for i, j in zip(order, order[1:]))
    return total + job_length(jobs[order[-1]])


def simulate_schedule(inst: FlowshopInstance, sigma: PermutationLike) -> Schedule:
    """Place jobs one by one on the machines, pushing each start forward until
    no operation begins before the previous occupant of its machine finishes.

    Zero-length operations occupy a single instant, so they still have to wait
    for the machine. Independent of the closed form used by ``makespan``.
    """
    order = as_permutation(inst, sigma)
    free_at = [0] * inst.machines
    start_times: List[int] = []
    start = 0
    length = 0

    for j in order:
        ops = inst.jobs[j].ops
        while True:
            push = _first_clash(ops, start, free_at)
            if push == 0:
                break
            start += push

        clock = start
        for machine, t in enumerate(ops):
            clock += t
            free_at[machine] = clock
        start_times.append(start)
        length = max(length, clock)

    return Schedule(order=order, start_times=tuple(start_times), length=length)


def _first_clash(ops: Sequence[int], start: int, free_at: Sequence[int]) -> int:
    """Delay needed to clear the first busy machine, 0 if none"""
    clock = start
    for machine, t in enumerate(ops):
        if clock < free_at[machine]:
            return free_at[machine] - clock
        clock += t
    return 0


def concat_jobs(parts: Sequence[JobLike]) -> Job:
    if not parts:
        raise StructuralError("cannot concatenate an empty list of jobs")
    jobs = [as_job(part) for part in parts]
    return Job(ops=tuple(chain.from_iterable(job.ops for job in jobs)))


def machine_load_lower_bound(inst: FlowshopInstance) -> int:
    """max(busiest machine load, longest job), a lower bound on C*_max"""
    loads = [sum(column) for column in zip(*(job.ops for job in inst.jobs))]
    return max(max(loads), max(job_length(job) for job in inst.jobs))


def delta_matrix(inst: FlowshopInstance) -> List[List[int]]:
    """delta between every ordered pair of jobs, diagonal included"""
    if sum(job_length(job) for job in inst.jobs) >= INT64_SAFE:
        raise StructuralError("operation lengths too large for the int64 delta kernel")
    ops = np.array([job.ops for job in inst.jobs], dtype=np.int64).reshape(inst.n, inst.machines)

    finished = np.cumsum(ops, axis=1)
    started = finished - ops
    rows = []
    for i in range(inst.n):
        rows.append((finished[i][None, :] - started).max(axis=1).tolist())
    return rows


def validate_instance(inst: FlowshopInstance) -> List[str]:
    """Problems that make an instance unusable; empty when it is fine"""
    issues = []
    if inst.n < 1:
        issues.append("instance has no jobs")
    if sum(job_length(job) for job in inst.jobs) * max(inst.n, 1) >= INT64_SAFE:
        issues.append("makespan may exceed the int64 range used by the exact solvers")
    return issues
