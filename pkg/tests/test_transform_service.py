import math
from fractions import Fraction

import pytest

from app.errors import StructuralError, ValidationFailure
from app.schemas.graphs import MatrixKind, WeightMatrix
from app.services.exact_service import held_karp, held_karp_value
from app.services.graph_service import max_weight, path_cost, tour_cost, validate_semimetric
from app.services.transform_service import (
    as_epsilon,
    atsp_to_atspp,
    backmap_normalize_and_replicate,
    backmap_replication,
    normalize_weights,
    normalize_and_replicate,
    repair_and_backmap_path,
    replicate_instance,
    replication_copies,
    scale_weights,
)
from conftest import random_semimetrics


@pytest.fixture
def skewed() -> WeightMatrix:
    return WeightMatrix.from_rows([[0, 3, 3], [2, 0, 2], [2, 2, 0]])


@pytest.mark.parametrize("raw, expected", [("1/2", Fraction(1, 2)), (1, Fraction(1)), (Fraction(2, 3), Fraction(2, 3))])
def test_as_epsilon_accepts_exact_values(raw, expected):
    assert as_epsilon(raw) == expected


@pytest.mark.parametrize("raw", [0.5, "0", "3/2", "-1/4", "half", "1/0"])
def test_as_epsilon_rejects(raw):
    with pytest.raises(StructuralError):
        as_epsilon(raw)


@pytest.mark.parametrize("epsilon, copies", [(1, 2), ("1/2", 4), ("2/3", 3)])
def test_replication_copies(epsilon, copies):
    assert replication_copies(epsilon) == copies


def test_normalize_rounds_up_to_multiples_of_phi():
    uniform = WeightMatrix.from_rows([[0 if u == v else 3 for v in range(4)] for u in range(4)])
    normalized, trace = normalize_weights(uniform, "1/2", certificate=10)
    assert trace.phi == Fraction(5, 8)
    assert trace.log_factor == 2
    assert set(x for row in normalized.rows() for x in row) == {0, 6}


def test_normalize_with_zero_tour_uses_unit_phi():
    zeros = WeightMatrix.from_rows([[0, 0], [0, 0]])
    normalized, trace = normalize_weights(zeros, 1, certificate=0)
    assert trace.phi == 1
    assert normalized.rows() == [[0, 1], [1, 0]]


def test_normalize_rejects_certificate_below_heaviest_arc(unit_triangle):
    with pytest.raises(ValidationFailure):
        normalize_weights(unit_triangle, 1, certificate=0)


def test_normalize_rejects_non_semimetric():
    broken = WeightMatrix.from_rows([[0, 9, 1], [1, 0, 1], [1, 1, 0]])
    with pytest.raises(ValidationFailure):
        normalize_weights(broken, 1, certificate=20)


def test_normalized_instances_stay_semimetric():
    for matrix in random_semimetrics(30, 2, 6, seed=8):
        normalized, _ = normalize_weights(matrix, "1/3", certificate=matrix.n * 9)
        assert validate_semimetric(normalized).ok


def test_replication_layout(skewed):
    replicated, trace = replicate_instance(skewed, 1, copies=2)
    assert replicated.n == 5
    assert trace.copy_vertices == ((0, 1, 2), (0, 3, 4))
    assert replicated.weight(1, 4) == 5
    assert replicated.weight(3, 2) == 5
    assert replicated.weight(0, 3) == 3


def test_replication_backmap_takes_cheapest_copy(skewed):
    _, trace = replicate_instance(skewed, 1, copies=2)
    assert backmap_replication(trace, [0, 1, 2, 3, 4]).order == (0, 1, 2)
    assert backmap_replication(trace, [3, 0, 2, 1, 4]).order in {(0, 1, 2), (0, 2, 1)}


def test_replication_multiplies_the_optimum():
    for index, matrix in enumerate(random_semimetrics(12, 2, 4, seed=9)):
        copies = 1 + index % 3
        replicated, trace = replicate_instance(matrix, 1, copies=copies)
        optimum = held_karp_value(replicated)
        assert optimum == copies * held_karp_value(matrix)
        tour = backmap_replication(trace, held_karp(replicated))
        assert copies * tour_cost(matrix, tour) <= optimum


def test_replication_with_other_anchor(skewed):
    replicated, trace = replicate_instance(skewed, 1, copies=3, anchor=2)
    assert trace.copy_vertices[1] == (3, 4, 0)
    assert held_karp_value(replicated) == 3 * held_karp_value(skewed)


def test_replication_rejects_bad_anchor(skewed):
    with pytest.raises(StructuralError):
        replicate_instance(skewed, 1, copies=2, anchor=3)


def test_normalize_and_replicate_round_trip_stays_within_phi_per_vertex():
    for matrix in random_semimetrics(10, 3, 4, seed=10):
        replicated, normalization, replication = normalize_and_replicate(matrix, 1, copies=2)
        tour = backmap_normalize_and_replicate(normalization, replication, held_karp(replicated))
        assert tour_cost(normalization.normalized, tour) == held_karp_value(normalization.normalized)
        assert tour_cost(matrix, tour) <= held_karp_value(matrix) + matrix.n * normalization.phi


@pytest.mark.parametrize("epsilon", [Fraction(1), Fraction(2, 3)])
def test_replicated_heaviest_arc_within_eps_of_optimum(epsilon):
    for matrix in random_semimetrics(15, 3, 4, seed=21):
        replicated, _, replication = normalize_and_replicate(matrix, epsilon)
        assert replication.copies == math.ceil(2 / epsilon)
        assert max_weight(replicated) <= epsilon * held_karp_value(replicated)


def test_split_matrix(unit_triangle):
    split, trace = atsp_to_atspp(unit_triangle, vertex=0)
    assert split.kind == MatrixKind.atspp
    assert split.rows() == [[0, 1, 1, 0], [2, 0, 1, 1], [2, 1, 0, 1], [2, 2, 2, 0]]
    assert (trace.v_out, trace.v_in, trace.padding) == (0, 3, 2)


def test_split_needs_three_vertices():
    with pytest.raises(StructuralError):
        atsp_to_atspp(WeightMatrix.from_rows([[0, 1], [1, 0]]))


def test_repair_rotates_and_moves_v_in(unit_triangle):
    split, trace = atsp_to_atspp(unit_triangle, vertex=0)
    assert path_cost(split, [1, 2, 0, 3]) == 3
    tour = repair_and_backmap_path(trace, [1, 2, 0, 3])
    assert tour.order == (0, 1, 2)
    assert tour_cost(unit_triangle, tour) == 3


def test_split_keeps_the_optimum_and_repairs_any_path(rng):
    for matrix in random_semimetrics(20, 3, 6, seed=11):
        vertex = rng.randrange(matrix.n)
        split, trace = atsp_to_atspp(matrix, vertex=vertex)
        assert held_karp_value(split) == held_karp_value(matrix)
        path = list(range(split.n))
        rng.shuffle(path)
        tour = repair_and_backmap_path(trace, path)
        assert tour_cost(matrix, tour) <= path_cost(split, path)


def test_scale_weights(one_two_triangle):
    assert scale_weights(one_two_triangle, 3).rows() == [[0, 3, 6], [6, 0, 3], [3, 6, 0]]
    with pytest.raises(StructuralError):
        scale_weights(one_two_triangle, 0)
