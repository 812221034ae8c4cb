import random

import pytest

from app.schemas.flowshop import FlowshopInstance
from app.schemas.graphs import WeightMatrix
from app.services.generator_service import gen_random_flowshop, gen_random_semimetric


@pytest.fixture
def two_jobs() -> FlowshopInstance:
    # optimum: job 2 then job 1, makespan 7
    return FlowshopInstance.from_rows([[3, 2], [1, 4]])


@pytest.fixture
def unit_triangle() -> WeightMatrix:
    return WeightMatrix.from_rows([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


@pytest.fixture
def one_two_triangle() -> WeightMatrix:
    """Semimetric with distances in {1, 2}; the only optimal tour is 0 -> 1 -> 2"""
    return WeightMatrix.from_rows([[0, 1, 2], [2, 0, 1], [1, 2, 0]])


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240101)


def random_semimetrics(count, n_low, n_high, max_weight=9, seed=0):
    chooser = random.Random(seed)
    for i in range(count):
        n = chooser.randint(n_low, n_high)
        yield gen_random_semimetric(n, chooser.randint(1, max_weight), seed * 1000 + i)


def random_flowshops(count, n_high, m_high, max_op=9, seed=0):
    chooser = random.Random(seed)
    for i in range(count):
        n, m = chooser.randint(1, n_high), chooser.randint(1, m_high)
        yield gen_random_flowshop(n, m, max_op, seed * 1000 + i)


@pytest.fixture
def write_file(tmp_path):
    def write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write
