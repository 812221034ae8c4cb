import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import partial
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.errors import StructuralError, ToolkitError
from app.schemas.bench import BENCH_COLUMNS, BenchReport, BenchRow, CriterionSummary
from app.schemas.flowshop import FlowshopInstance
from app.services.embedding_service import (
    build_hardness_instance,
    embed_semimetric,
    extract_tour,
    gadget_half_size,
    gadget_jobs,
    predicted_optimum,
)
from app.services.exact_service import brute_force_nwfs, held_karp_value, solve_nwfs
from app.services.flowshop_service import delta_matrix, makespan, simulate_schedule
from app.services.generator_service import gen_random_flowshop, gen_random_semimetric
from app.services.graph_service import free_path_instance, nwfs_to_atsp, tour_cost
from app.services.solver_service import (
    ceil_log2,
    cover_cost,
    fgm_atsp,
    min_cycle_cover,
    nwfs_log_m_approx,
)
from app.services.transform_service import (
    atsp_to_atspp,
    repair_and_backmap_path,
    replicate_instance,
)

logger = logging.getLogger(__name__)

MAX_HARDNESS_JOBS = 14
TRANSFER_SLACK = 10  # criterion 10 fails a tour ratio above flowshop ratio * (1 + 10 eps)


class Case(NamedTuple):
    criterion: str
    instance_id: str
    run: Callable[[], List[BenchRow]]


def _ratio(value: int, optimum: int) -> Optional[Fraction]:
    if optimum == 0:
        return Fraction(1) if value == 0 else None
    return Fraction(value, optimum)


def _row(
    criterion: str,
    instance_id: str,
    n: int,
    m: int,
    algorithm: str,
    value: int,
    optimum: Optional[int] = None,
    bound: Optional[Fraction] = None,
    passed: Optional[bool] = None,
) -> BenchRow:
    ratio = _ratio(value, optimum) if optimum is not None else None
    if passed is None:
        if bound is not None:
            passed = ratio is not None and ratio <= bound
        else:
            passed = optimum is None or value == optimum
    return BenchRow(
        criterion=criterion,
        instance_id=instance_id,
        n=n,
        m=m,
        algorithm=algorithm,
        value=value,
        optimum=optimum,
        ratio=None if ratio is None else float(ratio),
        bound=None if bound is None else float(bound),
        passed=passed,
    )


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 63))


# ==================== CRITERION RUNNERS ====================

def _delta_oracle(criterion: str, instance_id: str, rng: np.random.Generator) -> List[BenchRow]:
    n, m = int(rng.integers(1, 8, endpoint=True)), int(rng.integers(1, 6, endpoint=True))
    inst = gen_random_flowshop(n, m, 9, _seed(rng))
    order = [int(j) for j in rng.permutation(n)]
    simulated = simulate_schedule(inst, order).length
    return [_row(criterion, instance_id, n, m, "makespan-vs-simulation", makespan(inst, order), simulated)]


def _triangle_violations(inst: FlowshopInstance) -> int:
    d = np.array(delta_matrix(inst), dtype=np.int64)
    # broken[a, b, c]: delta(a, c) > delta(a, b) + delta(b, c)
    broken = d[:, None, :] > d[:, :, None] + d[None, :, :]
    return int(broken.sum())


def _delta_triangle_exhaustive(criterion: str, instance_id: str, m: int) -> List[BenchRow]:
    jobs = list(itertools.product(range(4), repeat=m))
    inst = FlowshopInstance.from_rows(jobs)
    violations = _triangle_violations(inst)
    return [_row(criterion, instance_id, inst.n, m, "delta-triangle-exhaustive", violations, 0)]


def _delta_triangle_random(
    criterion: str, instance_id: str, rng: np.random.Generator, triples: int
) -> List[BenchRow]:
    violations = 0
    for _ in range(triples):
        m = int(rng.integers(1, 6, endpoint=True))
        violations += _triangle_violations(gen_random_flowshop(3, m, 9, _seed(rng)))
    return [_row(criterion, instance_id, 3 * triples, 6, "delta-triangle-random", violations, 0)]


def _reduction_identity(criterion: str, instance_id: str, rng: np.random.Generator) -> List[BenchRow]:
    n, m = int(rng.integers(1, 7, endpoint=True)), int(rng.integers(1, 4, endpoint=True))
    inst = gen_random_flowshop(n, m, 9, _seed(rng))
    optimum = makespan(inst, brute_force_nwfs(inst))
    matrix, _ = nwfs_to_atsp(inst)
    return [_row(criterion, instance_id, n, m, "held-karp-on-reduction", held_karp_value(matrix), optimum)]


def _embedding_exactness(criterion: str, instance_id: str, rng: np.random.Generator) -> List[BenchRow]:
    n, scale = int(rng.integers(2, 8, endpoint=True)), int(rng.integers(1, 12, endpoint=True))
    matrix = gen_random_semimetric(n, scale, _seed(rng))
    jobs = embed_semimetric(matrix)
    d = delta_matrix(FlowshopInstance(jobs=jobs, machines=jobs[0].machines))
    w = matrix.weights
    violations = sum(1 for u in range(n) for v in range(n) if u != v and d[u][v] != w[u][v] + 1)
    return [_row(criterion, instance_id, n, jobs[0].machines, "semimetric-embedding", violations, 0)]


def _gadget_exactness(criterion: str, instance_id: str, count: int, scale: int) -> List[BenchRow]:
    jobs = gadget_jobs(count, scale)
    k = gadget_half_size(count)
    d = delta_matrix(FlowshopInstance(jobs=jobs, machines=jobs[0].machines))
    violations = sum(
        1
        for a in range(count)
        for b in range(count)
        if d[a][b] != (1 if a == b else scale)
    )
    violations += sum(1 for job in jobs if sum(job.ops) != 4 * k * scale or job.machines != 8 * k * scale)
    return [_row(criterion, instance_id, count, 8 * k * scale, f"gadgets-D{scale}", violations, 0)]


def _split_equality(criterion: str, instance_id: str, rng: np.random.Generator) -> List[BenchRow]:
    n, max_w = int(rng.integers(3, 7, endpoint=True)), int(rng.integers(1, 9, endpoint=True))
    matrix = gen_random_semimetric(n, max_w, _seed(rng))
    split, trace = atsp_to_atspp(matrix)
    tour_optimum = held_karp_value(matrix)
    path_optimum = held_karp_value(split)

    repairs_ok = True
    for _ in range(5):
        path = [int(v) for v in rng.permutation(split.n)]
        try:
            repair_and_backmap_path(trace, path)
        except ToolkitError as exc:
            logger.error(f"{instance_id}: path repair failed: {exc.detail}")
            repairs_ok = False
    return [
        _row(
            criterion, instance_id, n, 0, "split-path-optimum", path_optimum, tour_optimum,
            passed=path_optimum == tour_optimum and repairs_ok,
        )
    ]


def _replication_identity(
    criterion: str, instance_id: str, rng: np.random.Generator, n: int, copies: int
) -> List[BenchRow]:
    matrix = gen_random_semimetric(n, int(rng.integers(1, 9, endpoint=True)), _seed(rng))
    replicated, _ = replicate_instance(matrix, 1, copies=copies)
    return [
        _row(
            criterion, instance_id, n, copies, "replication-optimum",
            held_karp_value(replicated), copies * held_karp_value(matrix),
        )
    ]


def _log_m_guarantee(criterion: str, instance_id: str, rng: np.random.Generator) -> List[BenchRow]:
    n, m = int(rng.integers(1, 8, endpoint=True)), int(rng.integers(1, 6, endpoint=True))
    inst = gen_random_flowshop(n, m, 9, _seed(rng))
    optimum = makespan(inst, brute_force_nwfs(inst))
    _, run = nwfs_log_m_approx(inst)
    levels_ok = all(cost <= optimum for cost in run.level_costs)
    if not levels_ok:
        logger.error(f"{instance_id}: a cycle cover costs more than the optimum {optimum}")
    bound = Fraction(run.guarantee)
    ratio = _ratio(run.makespan, optimum)
    return [
        _row(
            criterion, instance_id, n, m, "nwfs-log-m-approx", run.makespan, optimum, bound,
            passed=levels_ok and ratio is not None and ratio <= bound,
        )
    ]


def _fgm_ratio(criterion: str, instance_id: str, rng: np.random.Generator) -> List[BenchRow]:
    n = int(rng.integers(2, 8, endpoint=True))
    matrix = gen_random_semimetric(n, int(rng.integers(1, 20, endpoint=True)), _seed(rng))
    optimum = held_karp_value(matrix)
    cover_ok = cover_cost(matrix, min_cycle_cover(matrix)) <= optimum
    value = tour_cost(matrix, fgm_atsp(matrix))
    bound = Fraction(max(ceil_log2(n), 1))
    ratio = _ratio(value, optimum)
    return [
        _row(
            criterion, instance_id, n, 0, "fgm-atsp", value, optimum, bound,
            passed=cover_ok and ratio is not None and ratio <= bound,
        )
    ]


def desk_copy_counts(n: int, epsilon: Fraction, max_jobs: int = MAX_HARDNESS_JOBS) -> Tuple[int, int]:
    """(replication copies, flowshop copies) keeping the job count of the
    constructed instance at most max_jobs.

    Two flowshop copies are kept whenever they fit; replication then takes
    the largest count up to ceil(2 / eps) that leaves room for them.
    """
    wanted = math.ceil(2 / epsilon)
    for least_copies in (2, 1):
        replication = min(wanted, (max_jobs // least_copies - 2) // (n - 1))
        if replication >= 1:
            n_prime = replication * (n - 1) + 2
            return replication, min(n_prime, max_jobs // n_prime)
    raise StructuralError(f"a {n}-vertex instance cannot be built with at most {max_jobs} jobs")


def _hardness_round_trip(
    instance_id: str, rng: np.random.Generator, epsilon: Fraction, criteria: Sequence[str]
) -> List[BenchRow]:
    n = int(rng.integers(3, 5, endpoint=True))
    matrix = gen_random_semimetric(n, int(rng.integers(1, 9, endpoint=True)), _seed(rng))
    replication, copies = desk_copy_counts(n, epsilon)
    hardness = build_hardness_instance(matrix, epsilon, replication_copies=replication, copies=copies)
    trace = hardness.trace
    flowshop = hardness.flowshop
    optimum_tour = held_karp_value(matrix)
    rows = []

    sigma = solve_nwfs(flowshop)
    optimum_makespan = makespan(flowshop, sigma)
    if "9" in criteria:
        predicted = predicted_optimum(trace, held_karp_value(free_path_instance(trace.scaled)))
        tour = extract_tour(hardness, sigma)
        normalized = trace.normalization.normalized
        cost = tour_cost(matrix, tour)
        normalized_optimal = tour_cost(normalized, tour) == held_karp_value(normalized)
        bound = 1 + Fraction(matrix.n * trace.normalization.phi, max(optimum_tour, 1))
        within = cost <= optimum_tour + matrix.n * trace.normalization.phi
        if not (normalized_optimal and within):
            logger.error(f"{instance_id}: extracted tour costs {cost}, optimum {optimum_tour}")
        rows.append(
            _row(
                "9", instance_id, flowshop.n, flowshop.machines, f"hardness-eps{epsilon}",
                optimum_makespan, predicted,
                passed=optimum_makespan == predicted and normalized_optimal and within,
            )
        )
        rows.append(
            _row(
                "9", instance_id, matrix.n, 0, f"hardness-tour-eps{epsilon}",
                cost, optimum_tour, bound, passed=normalized_optimal and within,
            )
        )

    if "10" in criteria:
        approx_sigma, _ = nwfs_log_m_approx(flowshop)
        flow_ratio = _ratio(makespan(flowshop, approx_sigma), optimum_makespan)
        tour = extract_tour(hardness, approx_sigma)
        cost = tour_cost(matrix, tour)
        bound = flow_ratio * (1 + TRANSFER_SLACK * epsilon)
        ratio = _ratio(cost, optimum_tour)
        if ratio is None or ratio > bound:
            logger.error(
                f"{instance_id}: tour ratio {ratio} exceeds flowshop ratio {flow_ratio} "
                f"times (1 + {TRANSFER_SLACK} eps)"
            )
        rows.append(
            _row("10", instance_id, matrix.n, flowshop.n, f"transfer-eps{epsilon}", cost, optimum_tour, bound)
        )
    return rows


# ==================== SUITES ====================

BASE_COUNTS: Dict[str, int] = {
    "1": 1000,
    "2": 10,     # batches of 1000 random triples, plus the exhaustive m <= 3 cases
    "3": 200,
    "4": 200,
    "6": 100,
    "7": 60,
    "8": 500,
    "9": 40,     # 20 instances x 2 values of epsilon
    "fgm": 100,
}

SUITES: Dict[str, Tuple[str, ...]] = {
    "acceptance": ("1", "2", "3", "4", "5", "6", "7", "8", "9", "10"),
    "approx": ("8",),
    "fgm": ("fgm",),
    "reductions": ("3", "6", "7"),
    "embeddings": ("4", "5"),
    "hardness": ("9", "10"),
}

_CRITERION_KEYS = {"fgm": 11}


def _rng(seed: int, criterion: str, index: int) -> np.random.Generator:
    key = _CRITERION_KEYS.get(criterion) or int(criterion)
    return np.random.default_rng([seed, key, index])


def _count(criterion: str, scale: float) -> int:
    return max(1, round(BASE_COUNTS[criterion] * scale))


def build_cases(criteria: Sequence[str], scale: float, seed: int) -> List[Case]:
    """Deterministic case list; every case draws from its own seeded generator"""
    runners = {
        "1": _delta_oracle,
        "3": _reduction_identity,
        "4": _embedding_exactness,
        "6": _split_equality,
        "8": _log_m_guarantee,
        "fgm": _fgm_ratio,
    }
    cases: List[Case] = []
    for criterion in criteria:
        if criterion in runners:
            for i in range(_count(criterion, scale)):
                instance_id = f"c{criterion}-{i:04d}"
                run = partial(runners[criterion], criterion, instance_id, _rng(seed, criterion, i))
                cases.append(Case(criterion, instance_id, run))
        elif criterion == "2":
            for m in (1, 2, 3):
                instance_id = f"c2-exhaustive-m{m}"
                cases.append(Case("2", instance_id, partial(_delta_triangle_exhaustive, "2", instance_id, m)))
            for i in range(_count("2", scale)):
                instance_id = f"c2-{i:04d}"
                run = partial(_delta_triangle_random, "2", instance_id, _rng(seed, "2", i), 1000)
                cases.append(Case("2", instance_id, run))
        elif criterion == "5":
            for count, block in itertools.product(range(1, 9), range(1, 7)):
                instance_id = f"c5-N{count}-D{block}"
                cases.append(Case("5", instance_id, partial(_gadget_exactness, "5", instance_id, count, block)))
        elif criterion == "7":
            for i in range(_count("7", scale)):
                n, copies = 2 + i % 4, 1 + (i // 4) % 3
                instance_id = f"c7-{i:04d}"
                run = partial(_replication_identity, "7", instance_id, _rng(seed, "7", i), n, copies)
                cases.append(Case("7", instance_id, run))
        elif criterion == "9":
            cases.extend(_hardness_cases(tuple(c for c in ("9", "10") if c in criteria), scale, seed))
        elif criterion == "10":
            if "9" not in criteria:
                cases.extend(_hardness_cases(("10",), scale, seed))
        else:
            raise StructuralError(f"unknown criterion {criterion!r}")
    return cases


def _hardness_cases(criteria: Tuple[str, ...], scale: float, seed: int) -> List[Case]:
    cases = []
    for i in range(_count("9", scale)):
        epsilon = Fraction(1) if i % 2 == 0 else Fraction(1, 2)
        # both values of epsilon see the same instance
        instance_id = f"c9-{i // 2:04d}-eps{epsilon}"
        run = partial(_hardness_round_trip, instance_id, _rng(seed, "9", i // 2), epsilon, criteria)
        cases.append(Case(criteria[0], instance_id, run))
    return cases


def _run_case(case: Case) -> List[BenchRow]:
    start = time.perf_counter()
    try:
        rows = case.run()
    except ToolkitError as exc:
        logger.error(f"{case.instance_id}: {exc.detail}")
        rows = [_row(case.criterion, case.instance_id, 0, 0, "error", 0, passed=False)]
    elapsed = time.perf_counter() - start
    for row in rows:
        row.wall_time = elapsed
    return rows


def summarize(rows: Sequence[BenchRow]) -> List[CriterionSummary]:
    summaries = []
    for criterion, group in itertools.groupby(rows, key=lambda row: row.criterion):
        group = list(group)
        ratios = [row.ratio for row in group if row.ratio is not None]
        summaries.append(
            CriterionSummary(
                criterion=criterion,
                rows=len(group),
                failures=sum(1 for row in group if not row.passed),
                max_ratio=max(ratios) if ratios else None,
                mean_ratio=sum(ratios) / len(ratios) if ratios else None,
            )
        )
    return summaries


def run_suite(
    name: str,
    scale: float = 1.0,
    workers: Optional[int] = None,
    seed: Optional[int] = None,
) -> BenchReport:
    if name not in SUITES:
        raise StructuralError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if scale <= 0:
        raise StructuralError(f"scale must be positive, got {scale}")
    seed = settings.bench_seed if seed is None else seed
    workers = settings.bench_workers if workers is None else workers

    cases = build_cases(SUITES[name], scale, seed)
    logger.info(f"Running suite {name}: {len(cases)} cases, {workers} worker(s), seed {seed}")
    # map() yields in submission order, whatever order the cases finish in
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        batches = list(pool.map(_run_case, cases))
    rows = sorted(
        (row for batch in batches for row in batch),
        key=lambda row: _criterion_position(SUITES[name], row.criterion),
    )

    report = BenchReport(suite=name, seed=seed, rows=rows, summaries=summarize(rows))
    for summary in report.summaries:
        logger.info(
            f"criterion {summary.criterion}: {summary.rows} rows, {summary.failures} failures, "
            f"max ratio {summary.max_ratio}"
        )
    return report


def _criterion_position(criteria: Sequence[str], criterion: str) -> int:
    return criteria.index(criterion) if criterion in criteria else len(criteria)


def report_to_tsv(report: BenchReport) -> str:
    lines = ["\t".join(BENCH_COLUMNS)]
    lines.extend("\t".join(row.cells()) for row in report.rows)
    return "\n".join(lines) + "\n"
