import itertools

import pytest

from app.errors import StructuralError, ValidationFailure
from app.schemas.flowshop import FlowshopInstance
from app.schemas.graphs import MatrixKind, WeightMatrix
from app.services.embedding_service import (
    block_job,
    build_hardness_instance,
    copy_contiguous,
    copy_graph_matrix,
    embed_semimetric,
    extract_tour,
    gadget_building_blocks,
    gadget_half_size,
    gadget_jobs,
    gadget_patterns,
    predicted_optimum,
    solve_atsp_via_flowshop,
)
from app.services.exact_service import held_karp_value, solve_nwfs
from app.services.flowshop_service import delta, delta_matrix, makespan
from app.services.graph_service import free_path_instance, path_cost, tour_cost
from conftest import random_semimetrics


@pytest.fixture(scope="module")
def hardness():
    triangle = WeightMatrix.from_rows([[0, 1, 2], [2, 0, 1], [1, 2, 0]])
    return build_hardness_instance(triangle, 1, replication_copies=2, copies=2)


def test_block_job():
    assert block_job(2, 3).ops == (0, 1, 1, 1, 0, 0)
    assert block_job(0, 2).ops == (0, 0, 1, 1)
    with pytest.raises(StructuralError):
        block_job(4, 3)


def test_block_deltas():
    assert delta(block_job(2, 3), block_job(1, 3)) == 2
    assert delta(block_job(0, 3), block_job(3, 3)) == 0
    assert delta(block_job(2, 3), block_job(2, 3)) == 1
    # saturates at the block's length
    assert delta(block_job(3, 3), block_job(0, 3)) == 3


@pytest.mark.parametrize("scale", range(1, 11))
def test_block_delta_closed_form(scale):
    for i, j in itertools.product(range(scale + 1), repeat=2):
        expected = min(scale, max(i - j + 1, 0))
        assert delta(block_job(i, scale), block_job(j, scale)) == expected


def test_embedding_of_two_vertices():
    matrix = WeightMatrix.from_rows([[0, 2], [1, 0]])
    first, second = embed_semimetric(matrix)
    assert first.ops == (0, 0, 0, 1, 1, 1, 0, 1, 1, 1, 0, 0)
    assert second.ops == (0, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1)
    assert delta(first, second) == 3
    assert delta(second, first) == 2


def test_embedding_of_heaviest_arc():
    first, second = embed_semimetric(WeightMatrix.from_rows([[0, 1], [1, 0]]))
    assert first.machines == 2 * 2 * 2
    assert delta(first, second) == delta(second, first) == 2


def test_embedding_adds_one_to_every_arc():
    for matrix in random_semimetrics(25, 2, 6, seed=12):
        d = delta_matrix_of(embed_semimetric(matrix))
        for u, v in itertools.permutations(range(matrix.n), 2):
            assert d[u][v] == matrix.weight(u, v) + 1


def delta_matrix_of(jobs):
    return delta_matrix(FlowshopInstance(jobs=jobs, machines=jobs[0].machines))


def test_embedding_rejects_non_semimetric():
    with pytest.raises(ValidationFailure):
        embed_semimetric(WeightMatrix.from_rows([[0, 5, 1], [1, 0, 1], [1, 1, 0]]))


def test_embedding_scale_must_cover_heaviest_arc(unit_triangle):
    with pytest.raises(StructuralError):
        embed_semimetric(WeightMatrix.from_rows([[0, 3], [3, 0]]), scale=2)
    with pytest.raises(StructuralError):
        embed_semimetric(WeightMatrix.from_rows([[0, 3], [3, 0]]), scale=3)
    assert embed_semimetric(unit_triangle, scale=4)[0].machines == 3 * 8


def test_gadget_building_blocks():
    h0, h1 = gadget_building_blocks(2)
    assert h0.ops == (1, 0, 1, 0, 1, 0, 1, 0)
    assert h1.ops == (1, 1, 1, 1, 0, 0, 0, 0)
    assert delta(h1, h0) == 2
    assert delta(h0, h1) == delta(h0, h0) == delta(h1, h1) == 1


@pytest.mark.parametrize("count, k", [(1, 1), (2, 1), (3, 2), (6, 2), (7, 3), (20, 3), (21, 4)])
def test_gadget_half_size(count, k):
    assert gadget_half_size(count) == k


def test_gadget_patterns_are_balanced_and_distinct():
    patterns = gadget_patterns(6)
    assert patterns[0] == (1, 1, 0, 0)
    assert len(set(patterns)) == 6
    assert all(sum(p) == 2 for p in patterns)


@pytest.mark.parametrize("count, scale", itertools.product((1, 2, 3, 5, 8), (1, 2, 4)))
def test_gadget_deltas(count, scale):
    jobs = gadget_jobs(count, scale)
    d = delta_matrix_of(jobs)
    k = gadget_half_size(count)
    for a, b in itertools.product(range(count), repeat=2):
        assert d[a][b] == (1 if a == b else scale)
    assert all(sum(job.ops) == 4 * k * scale for job in jobs)


def test_hardness_instance_shape(hardness):
    trace = hardness.trace
    assert (trace.n_prime, trace.copies, trace.gadget_half_size) == (6, 2, 1)
    assert trace.w_prime == 20
    assert trace.block_scale == 41
    assert hardness.flowshop.n == 12
    assert trace.job_copy == (0,) * 6 + (1,) * 6
    assert trace.job_vertex == tuple(range(6)) * 2
    assert all(sum(job.ops) == trace.job_length == 410 for job in hardness.flowshop.jobs)


def test_job_deltas_follow_the_copy_graph(hardness):
    d = delta_matrix(hardness.flowshop)
    copy_graph = copy_graph_matrix(hardness.trace)
    assert copy_graph.kind == MatrixKind.atspp
    for a, b in itertools.permutations(range(hardness.flowshop.n), 2):
        assert d[a][b] == copy_graph.weight(a, b) + 1


def test_optimal_schedule_matches_prediction_and_gives_optimal_tour(hardness):
    trace = hardness.trace
    sigma = solve_nwfs(hardness.flowshop)
    optimal_path = held_karp_value(free_path_instance(trace.scaled))
    assert optimal_path == 18
    assert makespan(hardness.flowshop, sigma) == predicted_optimum(trace, optimal_path) == 497

    tour = extract_tour(hardness, sigma)
    assert tour.order == (0, 1, 2)
    assert tour_cost(trace.original, tour) == 3


def test_copy_contiguous_groups_by_first_appearance(hardness):
    trace = hardness.trace
    interleaved = [6, 0, 7, 1, 8, 2, 9, 3, 10, 4, 11, 5]
    contiguous = copy_contiguous(trace, interleaved)
    assert contiguous == (6, 7, 8, 9, 10, 11, 0, 1, 2, 3, 4, 5)
    copy_graph = copy_graph_matrix(trace)
    assert path_cost(copy_graph, contiguous) <= path_cost(copy_graph, interleaved)


def test_any_schedule_maps_back_to_a_tour(hardness, rng):
    for _ in range(5):
        sigma = list(range(hardness.flowshop.n))
        rng.shuffle(sigma)
        tour = extract_tour(hardness, sigma)
        assert sorted(tour.order) == [0, 1, 2]


def test_extract_tour_rejects_non_permutation(hardness):
    with pytest.raises(StructuralError):
        extract_tour(hardness, [0] * hardness.flowshop.n)


def test_hardness_preconditions(unit_triangle):
    with pytest.raises(StructuralError):
        build_hardness_instance(WeightMatrix.from_rows([[0, 1], [1, 0]]), 1)
    path_kind = WeightMatrix(weights=unit_triangle.weights, kind=MatrixKind.atspp)
    with pytest.raises(StructuralError):
        build_hardness_instance(path_kind, 1)
    with pytest.raises(ValidationFailure):
        build_hardness_instance(WeightMatrix.from_rows([[0, 5, 1], [1, 0, 1], [1, 1, 0]]), 1)
    with pytest.raises(StructuralError):
        build_hardness_instance(unit_triangle, "2")


def test_solve_via_flowshop_with_approximation(one_two_triangle):
    tour = solve_atsp_via_flowshop(one_two_triangle, 1, replication_copies=1, copies=1)
    assert sorted(tour.order) == [0, 1, 2]
    with pytest.raises(StructuralError):
        solve_atsp_via_flowshop(one_two_triangle, 1, solver="greedy", replication_copies=1, copies=1)
