import itertools

import pytest

from app.errors import LimitExceededError
from app.schemas.flowshop import FlowshopInstance
from app.schemas.graphs import HamPath, MatrixKind, Tour, WeightMatrix
from app.services.exact_service import (
    brute_force_nwfs,
    exact_service,
    held_karp,
    held_karp_value,
    solve_nwfs,
)
from app.services.flowshop_service import makespan
from app.services.graph_service import tour_cost
from conftest import random_flowshops, random_semimetrics


def test_held_karp_on_triangle(one_two_triangle):
    tour = held_karp(one_two_triangle)
    assert isinstance(tour, Tour)
    assert tour.order == (0, 1, 2)
    assert held_karp_value(one_two_triangle) == 3


def test_held_karp_single_vertex():
    assert held_karp(WeightMatrix.from_rows([[0]])).order == (0,)


def test_held_karp_matches_enumeration():
    for matrix in random_semimetrics(25, 2, 6, seed=6):
        best = min(
            tour_cost(matrix, (0,) + rest)
            for rest in itertools.permutations(range(1, matrix.n))
        )
        assert held_karp_value(matrix) == best


def test_held_karp_free_path(one_two_triangle):
    free = WeightMatrix(weights=one_two_triangle.weights, kind=MatrixKind.atspp)
    path = held_karp(free)
    assert isinstance(path, HamPath)
    assert held_karp_value(free) == 2


def test_held_karp_fixed_endpoints(one_two_triangle):
    fixed = WeightMatrix(
        weights=one_two_triangle.weights, kind=MatrixKind.atspp, source=2, sink=0
    )
    assert held_karp(fixed).order == (2, 1, 0)
    assert held_karp_value(fixed) == 4
    assert held_karp_value(fixed, use_endpoints=False) == 2


def test_held_karp_limit(unit_triangle):
    with pytest.raises(LimitExceededError):
        held_karp(unit_triangle, limit=2)


def test_brute_force_two_jobs(two_jobs):
    assert brute_force_nwfs(two_jobs).order == (1, 0)
    assert exact_service.optimal_makespan(two_jobs)[1] == 7


def test_brute_force_limit(two_jobs):
    with pytest.raises(LimitExceededError):
        brute_force_nwfs(two_jobs, limit=1)


def test_brute_force_returns_first_optimal_order():
    inst = FlowshopInstance.from_rows([[2, 3]] * 3)
    assert brute_force_nwfs(inst).order == (0, 1, 2)
    assert makespan(inst, (0, 1, 2)) == 11


def test_held_karp_route_agrees_with_enumeration(monkeypatch):
    instances = list(random_flowshops(30, 6, 5, seed=7))
    enumerated = [makespan(inst, solve_nwfs(inst)) for inst in instances]
    monkeypatch.setattr(exact_service, "brute_force_limit", 0)
    via_atsp = [makespan(inst, solve_nwfs(inst)) for inst in instances]
    assert via_atsp == enumerated
