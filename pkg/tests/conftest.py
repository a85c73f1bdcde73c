import math

import numpy as np
import pytest

from wmhash.vectors import SparseVector


def dense_jaccard(x: SparseVector, y: SparseVector) -> float:
    """Independent route to generalized Jaccard: dense min/max sums."""
    a, b = x.to_dense(), y.to_dense()
    return math.fsum(np.minimum(a, b)) / math.fsum(np.maximum(a, b))


def direct_green(maxima, alpha, x: SparseVector, r: float) -> bool:
    """Green-region membership by a linear scan, rebuilt from the maxima.

    Each r belongs to the component whose half-open cell [start, start + m)
    contains it; it is green when that component has weight w > 0 and
    r <= start + alpha * w.
    """
    weights = dict(zip(x.indices.tolist(), x.weights.tolist()))
    start = 0
    for i, mx in enumerate(maxima):
        if mx <= 0:
            continue
        m = math.ceil(alpha * mx)
        if start <= r < start + m:
            w = alpha * weights.get(i, 0.0)
            return w > 0 and r <= start + w
        start += m
    raise AssertionError("r outside the layout")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
