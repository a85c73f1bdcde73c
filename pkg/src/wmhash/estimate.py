"""Exact generalized Jaccard, the sketch estimator, and the statistics around them."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import rng as _rng
from .config import SchemeConfig
from .errors import DomainError, IncompatibleSketchError, UsageError
from .redgreen import RedGreenLayout, Sketch
from .vectors import SparseVector


@dataclass(frozen=True)
class EstimateReport:
    j_hat: float
    k: int
    std_err: float
    scheme: str

    def to_dict(self) -> dict:
        return asdict(self)


def exact_jaccard(x: SparseVector, y: SparseVector) -> float:
    """sum(min) / sum(max) by a linear merge of the two sorted entry lists."""
    if x.dim != y.dim:
        raise UsageError(f"dimension mismatch: {x.dim} != {y.dim}")
    xi, xw = x.indices.tolist(), x.weights.tolist()
    yi, yw = y.indices.tolist(), y.weights.tolist()
    lo: list[float] = []
    hi: list[float] = []
    a = b = 0
    while a < len(xi) and b < len(yi):
        if xi[a] == yi[b]:
            lo.append(min(xw[a], yw[b]))
            hi.append(max(xw[a], yw[b]))
            a += 1
            b += 1
        elif xi[a] < yi[b]:
            hi.append(xw[a])
            a += 1
        else:
            hi.append(yw[b])
            b += 1
    hi.extend(xw[a:])
    hi.extend(yw[b:])
    den = math.fsum(hi)
    if den == 0:
        raise DomainError("Jaccard similarity of two all-zero vectors is undefined")
    return math.fsum(lo) / den


def check_compatible(a: Sketch, b: Sketch) -> None:
    for name in ("scheme", "master_seed", "layout_id", "k"):
        va, vb = getattr(a, name), getattr(b, name)
        if va != vb:
            raise IncompatibleSketchError(name, va, vb)


def slot_matches(a: Sketch, b: Sketch) -> np.ndarray:
    check_compatible(a, b)
    eq = a.values == b.values
    return eq.all(axis=1) if eq.ndim == 2 else eq


def estimate_from_sketches(a: Sketch, b: Sketch) -> EstimateReport:
    m = slot_matches(a, b)
    j = float(m.mean())
    return EstimateReport(j, a.k, math.sqrt(j * (1 - j) / a.k), a.scheme)


SketchFn = Callable[[SparseVector, SchemeConfig], Sketch]


def sketch_fn(scheme: str, layout: RedGreenLayout | None = None) -> SketchFn:
    """Sketching callable for ``scheme``; red-green needs a layout."""
    from . import baselines, redgreen

    if scheme == "redgreen":
        if layout is None:
            raise UsageError("the red-green scheme needs a layout")
        return lambda x, cfg: redgreen.sketch(layout, x, cfg)
    if scheme == "ioffe":
        return baselines.ioffe_sketch
    if scheme == "reduction":
        return baselines.reduction_sketch
    raise UsageError(f"unknown scheme {scheme!r}")


def repetition_seeds(reps: int, base_seed: int = 0) -> list[int]:
    return [_rng.derive(base_seed, rep) for rep in range(reps)]


def estimate_samples(
    pair: tuple[SparseVector, SparseVector],
    scheme: str,
    k: int,
    reps: int,
    *,
    layout: RedGreenLayout | None = None,
    base_seed: int = 0,
) -> np.ndarray:
    """``(reps, k)`` boolean slot-match matrix, one row per master seed."""
    if k < 1 or reps < 1:
        raise UsageError("k and reps must be at least 1")
    fn = sketch_fn(scheme, layout)
    x, y = pair
    rows = []
    for seed in repetition_seeds(reps, base_seed):
        cfg = SchemeConfig(scheme=scheme, k=k, master_seed=seed)
        rows.append(slot_matches(fn(x, cfg), fn(y, cfg)))
    return np.array(rows)


def error_samples(matches: np.ndarray, j_true: float) -> np.ndarray:
    """|J_hat_k - J| for every repetition and every prefix length k."""
    k = np.arange(1, matches.shape[1] + 1)
    return np.abs(np.cumsum(matches, axis=1) / k - j_true)


def error_curve(
    pair: tuple[SparseVector, SparseVector],
    scheme: str,
    k_max: int,
    reps: int,
    *,
    layout: RedGreenLayout | None = None,
    base_seed: int = 0,
) -> list[tuple[int, float]]:
    """Mean absolute estimation error for k = 1..k_max.

    Each repetition sketches once with ``k_max`` slots and scores its
    prefixes, which is valid because slots are independent.
    """
    j = exact_jaccard(*pair)
    m = estimate_samples(pair, scheme, k_max, reps, layout=layout, base_seed=base_seed)
    mae = error_samples(m, j).mean(axis=0)
    return [(k + 1, float(e)) for k, e in enumerate(mae)]


def hash_stats(sketches: Sequence[Sketch] | Iterable[Sketch]) -> tuple[float, int, int]:
    """(mean, max, bits needed to store max) over every hash value."""
    sketches = list(sketches)
    if not sketches:
        raise UsageError("no sketches given")
    schemes = {s.scheme for s in sketches}
    if len(schemes) > 1:
        raise UsageError(f"mixed schemes: {sorted(schemes)}")
    values = np.concatenate([np.asarray(s.values).reshape(-1) for s in sketches])
    return values_stats(values)


def values_stats(values: np.ndarray) -> tuple[float, int, int]:
    values = np.asarray(values)
    vmax = int(values.max())
    return float(values.mean()), vmax, bits_needed(vmax)


def bits_needed(vmax: int) -> int:
    return max(1, int(vmax).bit_length())
