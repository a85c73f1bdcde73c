"""Wall-clock benchmarks. Data loading is never timed."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .baselines import ioffe_sketch
from .config import SchemeConfig
from .errors import UsageError
from .estimate import sketch_fn, values_stats
from .redgreen import RedGreenLayout, build_layout, optimize_alpha, sketch
from .synthetic import scaling_instance
from .vectors import Dataset


@dataclass
class SchemeTiming:
    scheme: str
    k: int
    vectors: int
    ms_per_vector: float
    setup_ms: float
    mean_hash: float | None
    max_hash: int | None
    bits_needed: int | None

    def to_dict(self) -> dict:
        return asdict(self)


def best_time(fn: Callable[[], object], reps: int) -> float:
    """Fastest of ``reps`` runs, in seconds."""
    if reps < 1:
        raise UsageError("reps must be at least 1")
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_dataset(
    ds: Dataset,
    schemes: Sequence[str],
    *,
    k: int = 500,
    reps: int = 3,
    master_seed: int = 0,
    alpha: float | str = 1.0,
    low_mem: bool = False,
    layout: RedGreenLayout | None = None,
) -> list[SchemeTiming]:
    if reps < 1:
        raise UsageError("reps must be at least 1")
    vectors = [v for v in ds if v.nnz]
    if not vectors:
        raise UsageError("dataset has no non-empty vectors")
    results = []
    for scheme in schemes:
        setup = 0.0
        if scheme == "redgreen" and layout is None:
            t0 = time.perf_counter()
            a = optimize_alpha(ds) if alpha == "auto" else float(alpha)
            layout = build_layout(ds.maxima, a, low_mem=low_mem)
            setup = time.perf_counter() - t0
        fn = sketch_fn(scheme, layout)
        cfg = SchemeConfig(scheme=scheme, k=k, master_seed=master_seed, low_mem=low_mem)
        out: list = []

        def run() -> None:
            out[:] = [fn(v, cfg) for v in vectors]

        secs = best_time(run, reps)
        mean = vmax = bits = None
        if scheme == "redgreen":
            mean, vmax, bits = values_stats(np.concatenate([s.values for s in out]))
        results.append(
            SchemeTiming(scheme, k, len(vectors), 1e3 * secs / len(vectors), 1e3 * setup, mean, vmax, bits)
        )
    return results


@dataclass
class ScalingPoint:
    d: int
    ioffe_ms: float
    redgreen_ms: float

    @property
    def speedup(self) -> float:
        return self.ioffe_ms / self.redgreen_ms


def scaling_trend(
    ds: Sequence[int] = (1_000, 10_000, 100_000),
    *,
    sparsity: float = 0.05,
    k: int = 500,
    reps: int = 3,
    master_seed: int = 0,
) -> list[ScalingPoint]:
    """Per-vector time of Ioffe vs red-green (layout excluded) as d grows at fixed s_x."""
    cfg = SchemeConfig(k=k, master_seed=master_seed)
    points = []
    for d in ds:
        x, data = scaling_instance(d, sparsity)
        layout = build_layout(data.maxima, 1.0)
        rg = best_time(lambda: sketch(layout, x, cfg), reps)
        io = best_time(lambda: ioffe_sketch(x, cfg), reps)
        points.append(ScalingPoint(d, 1e3 * io, 1e3 * rg))
    return points


def format_table(rows: Sequence[SchemeTiming]) -> str:
    head = f"{'scheme':<10} {'k':>5} {'ms/vector':>12} {'setup ms':>10} {'mean h':>8} {'max h':>7} {'bits':>5}"
    lines = [head, "-" * len(head)]
    for r in rows:
        mean = f"{r.mean_hash:8.2f}" if r.mean_hash is not None else f"{'-':>8}"
        vmax = f"{r.max_hash:7d}" if r.max_hash is not None else f"{'-':>7}"
        bits = f"{r.bits_needed:5d}" if r.bits_needed is not None else f"{'-':>5}"
        lines.append(f"{r.scheme:<10} {r.k:>5} {r.ms_per_vector:12.3f} {r.setup_ms:10.2f} {mean} {vmax} {bits}")
    return "\n".join(lines)
