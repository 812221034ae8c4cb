import logging

import numpy as np

from app.errors import StructuralError
from app.schemas.flowshop import FlowshopInstance
from app.schemas.graphs import WeightMatrix

logger = logging.getLogger(__name__)


def metric_closure(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest path lengths (Floyd-Warshall), diagonal zeroed"""
    dist = np.array(weights, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    for k in range(dist.shape[0]):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    return dist


def gen_random_semimetric(n: int, max_weight: int, seed: int) -> WeightMatrix:
    """Uniform arc weights in 0..max_weight closed under shortest paths.

    Always passes validate_semimetric; the same seed gives the same matrix.
    """
    if n < 2:
        raise StructuralError(f"a random instance needs n >= 2, got {n}")
    if max_weight < 1:
        raise StructuralError(f"max weight must be at least 1, got {max_weight}")
    rng = np.random.default_rng(seed)
    drawn = rng.integers(0, max_weight, size=(n, n), endpoint=True)
    closed = metric_closure(drawn)
    logger.debug(f"Generated {n}-vertex semimetric (seed {seed})")
    return WeightMatrix.from_rows(closed.tolist())


def gen_random_flowshop(n: int, m: int, max_op: int, seed: int) -> FlowshopInstance:
    """n jobs on m machines, operation lengths uniform in 0..max_op"""
    if n < 1 or m < 1:
        raise StructuralError(f"need at least one job and one machine, got n={n}, m={m}")
    if max_op < 0:
        raise StructuralError(f"max operation length must be nonnegative, got {max_op}")
    rng = np.random.default_rng(seed)
    ops = rng.integers(0, max_op, size=(n, m), endpoint=True)
    logger.debug(f"Generated flowshop instance n={n}, m={m} (seed {seed})")
    return FlowshopInstance.from_rows(ops.tolist())
