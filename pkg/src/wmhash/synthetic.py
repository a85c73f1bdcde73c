"""Synthetic vectors with a prescribed similarity or effective sparsity."""

from __future__ import annotations

import numpy as np

from .redgreen import RedGreenLayout, build_layout
from .vectors import Dataset, SparseVector


def pair_with_jaccard(
    target: float, rng: np.random.Generator, *, shared: int = 60, dim: int | None = None
) -> tuple[SparseVector, SparseVector]:
    """Two real-weighted vectors whose generalized Jaccard is ``target``.

    Shared coordinates get nearly equal weights; the rest of the gap is made
    up with disjoint mass split between x-only and y-only coordinates.
    Callers should still measure the result with ``exact_jaccard``.
    """
    if not 0 < target <= 1:
        raise ValueError("target must lie in (0, 1]")
    base = rng.uniform(1.0, 20.0, shared)
    x_sh = base
    y_sh = base * rng.uniform(0.97, 1.03, shared)
    lo = np.minimum(x_sh, y_sh).sum()
    hi = np.maximum(x_sh, y_sh).sum()
    if lo / hi < target:
        y_sh = x_sh.copy()
        lo = hi = x_sh.sum()
    extra = (lo / target - hi) / 2
    n_extra = max(1, shared // 2)
    if extra > 0:
        ex = rng.dirichlet(np.ones(n_extra)) * extra
        ey = rng.dirichlet(np.ones(n_extra)) * extra
    else:
        ex = ey = np.zeros(0)
    n = shared + ex.size + ey.size
    dim = dim or n
    perm = rng.permutation(dim)[:n]
    s_idx, x_idx, y_idx = perm[:shared], perm[shared : shared + ex.size], perm[shared + ex.size :]
    x = SparseVector.from_pairs(list(zip(s_idx, x_sh)) + list(zip(x_idx, ex)), dim)
    y = SparseVector.from_pairs(list(zip(s_idx, y_sh)) + list(zip(y_idx, ey)), dim)
    return x, y


def vector_with_sparsity(
    sparsity: float, *, components: int = 100, cell: int = 100
) -> tuple[SparseVector, RedGreenLayout]:
    """Vector plus layout with s_x == sparsity: every component has bound ``cell``."""
    if not 0 < sparsity <= 1:
        raise ValueError("sparsity must lie in (0, 1]")
    maxima = np.full(components, float(cell))
    layout = build_layout(maxima, 1.0)
    x = SparseVector(np.arange(components), np.full(components, sparsity * cell), components)
    return x, layout


def scaling_instance(d: int, sparsity: float = 0.05) -> tuple[SparseVector, Dataset]:
    """``d`` unit weights against integer maxima of 1/sparsity each (s_x == sparsity)."""
    bound = round(1 / sparsity)
    x = SparseVector(np.arange(d), np.ones(d), d)
    cap = SparseVector(np.arange(d), np.full(d, float(bound)), d)
    return x, Dataset.from_vectors([x, cap])
