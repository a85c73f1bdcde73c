"""Red-green rejection-sampling weighted minwise hashing.

Every retained coordinate i owns the integer-aligned interval
``[start_i, start_i + m_i)`` of ``[0, M)`` where ``m_i = ceil(alpha * max_i)``.
For a vector x the first ``alpha * x_i`` of that interval is green, the rest
red. A hash value is the number of chained uniform draws on ``[0, M)`` until
the first one lands green; two vectors collide with probability equal to
their generalized Jaccard similarity, and the expected number of draws is
``M / ||alpha x||_1``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rng as _rng
from .config import DEFAULT_DELTA, SchemeConfig
from .errors import (
    DomainError,
    IterationCapError,
    LayoutMismatchError,
    ResourceError,
    UsageError,
)
from .vectors import Dataset, SparseVector, l1_norm

# int_to_comp costs 4 bytes per cell
DEFAULT_MAX_CELLS = 1 << 27
# r * 10**6 must stay below 2**64 when reseeding
MAX_RANGE = 10**13

DEFAULT_ALPHA_GRID = tuple(2.0**j for j in range(-4, 9))

LAYOUT_MAGIC = b"WMHL"
LAYOUT_VERSION = 1
_LAYOUT_HEADER = struct.Struct("<4sHHQQdQ")


@dataclass(frozen=True, eq=False)
class RedGreenLayout:
    """Per-dataset interval layout plus the O(1) lookup tables.

    Coordinates whose dataset maximum is zero are compacted out; ``coords``
    maps local component ids back to original indices. ``int_to_comp`` is
    ``None`` in low-memory mode.
    """

    dim: int
    alpha: float
    coords: np.ndarray
    bounds: np.ndarray
    prefix: np.ndarray
    int_to_comp: np.ndarray | None = field(repr=False)
    local_of: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return int(self.prefix[-1])

    @property
    def comp_to_m(self) -> np.ndarray:
        return self.prefix[:-1]

    @property
    def low_mem(self) -> bool:
        return self.int_to_comp is None

    @property
    def n_components(self) -> int:
        return int(self.coords.size)

    def to_bytes(self) -> bytes:
        n = self.n_components
        header = _LAYOUT_HEADER.pack(
            LAYOUT_MAGIC, LAYOUT_VERSION, 0, self.dim, self.M, self.alpha, n
        )
        return b"".join(
            [
                header,
                self.coords.astype("<u8").tobytes(),
                self.bounds.astype("<u8").tobytes(),
                self.prefix.astype("<u8").tobytes(),
            ]
        )

    @cached_property
    def layout_id(self) -> int:
        return layout_digest(self.to_bytes())

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())


def layout_digest(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def _assemble(
    dim: int,
    alpha: float,
    coords: np.ndarray,
    bounds: np.ndarray,
    *,
    low_mem: bool,
    max_cells: int,
) -> RedGreenLayout:
    M = int(bounds.sum())
    if M == 0:
        raise DomainError("all-zero dataset: the layout would be empty")
    if M > MAX_RANGE:
        raise ResourceError(f"layout range M={M} is too large; use a smaller alpha")
    if not low_mem and M > max_cells:
        raise ResourceError(
            f"lookup table needs {M} cells ({4 * M / 2**20:.0f} MiB), over the budget of "
            f"{max_cells}; use a smaller alpha or low-memory mode"
        )
    prefix = np.zeros(coords.size + 1, dtype=np.float64)
    np.cumsum(bounds, out=prefix[1:])
    int_to_comp = None
    if not low_mem:
        int_to_comp = np.repeat(np.arange(coords.size, dtype=np.int32), bounds)
    local_of = np.full(dim, -1, dtype=np.int64)
    local_of[coords] = np.arange(coords.size)
    arrays = [coords, bounds, prefix, local_of] + ([int_to_comp] if int_to_comp is not None else [])
    for a in arrays:
        a.setflags(write=False)
    return RedGreenLayout(dim, float(alpha), coords, bounds, prefix, int_to_comp, local_of)


def build_layout(
    maxima: Sequence[float] | np.ndarray,
    alpha: float = 1.0,
    *,
    low_mem: bool = False,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> RedGreenLayout:
    """Build the layout from per-coordinate dataset maxima, scaled by ``alpha``."""
    if not alpha > 0 or not math.isfinite(alpha):
        raise UsageError(f"alpha must be a positive finite number, got {alpha}")
    maxima = np.asarray(maxima, dtype=np.float64)
    if maxima.ndim != 1 or maxima.size == 0:
        raise UsageError("maxima must be a non-empty 1-d sequence")
    if np.any(maxima < 0) or not np.all(np.isfinite(maxima)):
        raise DomainError("maxima must be finite and non-negative")
    coords = np.flatnonzero(maxima).astype(np.int64)
    bounds = np.ceil(alpha * maxima[coords]).astype(np.int64)
    return _assemble(maxima.size, alpha, coords, bounds, low_mem=low_mem, max_cells=max_cells)


def layout_from_bytes(
    data: bytes, *, low_mem: bool = False, max_cells: int = DEFAULT_MAX_CELLS
) -> RedGreenLayout:
    if len(data) < _LAYOUT_HEADER.size:
        raise UsageError("layout file is truncated")
    magic, version, _, dim, M, alpha, n = _LAYOUT_HEADER.unpack_from(data)
    if magic != LAYOUT_MAGIC:
        raise UsageError("not a layout file (bad magic)")
    if version != LAYOUT_VERSION:
        raise UsageError(f"unsupported layout version {version}")
    expected = _LAYOUT_HEADER.size + 8 * (3 * n + 1)
    if len(data) != expected:
        raise UsageError(f"layout file has {len(data)} bytes, expected {expected}")
    off = _LAYOUT_HEADER.size
    coords = np.frombuffer(data, "<u8", n, off).astype(np.int64)
    bounds = np.frombuffer(data, "<u8", n, off + 8 * n).astype(np.int64)
    prefix = np.frombuffer(data, "<u8", n + 1, off + 16 * n).astype(np.int64)
    if prefix[0] != 0 or np.any(np.diff(prefix) != bounds) or prefix[-1] != M:
        raise UsageError("layout file is inconsistent: prefix sums do not match bounds")
    return _assemble(dim, alpha, coords, bounds, low_mem=low_mem, max_cells=max_cells)


def load_layout(path: str | Path, **kw) -> RedGreenLayout:
    return layout_from_bytes(Path(path).read_bytes(), **kw)


class PreparedVector:
    """A vector mapped into layout-local components and scaled by alpha.

    ``green_end[c]`` is where component c's green interval ends, or -1 when
    the vector has no weight there, so the O(1) test is a single gather.
    ``starts``/``widths``/``bounds`` list only the green intervals, sorted,
    for the binary-search lookup; they are built on first use.
    """

    def __init__(self, layout: RedGreenLayout, local: np.ndarray, widths: np.ndarray, bounds: np.ndarray):
        self._prefix = layout.prefix
        self.local = local
        self.widths = widths
        self._bounds = bounds
        self.mass = float(widths.sum())
        self.green_end = np.full(layout.n_components, -1.0)
        self.green_end[local] = layout.prefix[local] + widths

    @cached_property
    def starts(self) -> np.ndarray:
        return self._prefix[self.local]

    @cached_property
    def bounds(self) -> np.ndarray:
        return self._bounds.astype(np.float64)


def prepare(layout: RedGreenLayout, x: SparseVector) -> PreparedVector:
    if x.dim != layout.dim:
        raise LayoutMismatchError(f"vector has dimension {x.dim}, layout has {layout.dim}")
    if layout.n_components == layout.dim:
        local = x.indices
    else:
        local = layout.local_of[x.indices]
        if np.any(local < 0):
            bad = int(x.indices[np.argmax(local < 0)])
            raise LayoutMismatchError(f"coordinate {bad} is absent from the layout (dataset maximum 0)")
    w = layout.alpha * x.weights if layout.alpha != 1.0 else x.weights
    bnd = layout.bounds[local]
    over = w > bnd
    if np.any(over):
        j = int(np.argmax(over))
        raise LayoutMismatchError(
            f"coordinate {int(x.indices[j])}: scaled weight {w[j]!r} exceeds its bound {int(bnd[j])}"
        )
    return PreparedVector(layout, local, w, bnd)


def _as_prepared(layout: RedGreenLayout, x: SparseVector | PreparedVector) -> PreparedVector:
    return x if isinstance(x, PreparedVector) else prepare(layout, x)


def _check_r(layout: RedGreenLayout, r: float) -> None:
    if not 0 <= r < layout.M:
        raise DomainError(f"r={r!r} outside [0, {layout.M})")


def is_green_o1(layout: RedGreenLayout, x: SparseVector | PreparedVector, r: float) -> bool:
    """Two table lookups: floor(r) names the owning component, then compare.

    Green includes the right end of the green interval.
    """
    if layout.int_to_comp is None:
        raise UsageError("layout was built in low-memory mode; use is_green_binsearch")
    _check_r(layout, r)
    p = _as_prepared(layout, x)
    return bool(r <= p.green_end[layout.int_to_comp[int(r)]])


def is_green_binsearch(layout: RedGreenLayout, x: SparseVector | PreparedVector, r: float) -> bool:
    _check_r(layout, r)
    p = _as_prepared(layout, x)
    pos = bisect_right(p.starts, r) - 1
    if pos < 0:
        return False
    start = p.starts[pos]
    return bool(r < start + p.bounds[pos] and r <= start + p.widths[pos])


def _green_o1_np(layout: RedGreenLayout, p: PreparedVector, r: np.ndarray) -> np.ndarray:
    return r <= p.green_end[layout.int_to_comp[r.astype(np.int64)]]


def _green_binsearch_np(layout: RedGreenLayout, p: PreparedVector, r: np.ndarray) -> np.ndarray:
    if p.starts.size == 0:
        return np.zeros(r.shape, dtype=bool)
    pos = np.searchsorted(p.starts, r, side="right") - 1
    valid = pos >= 0
    pos = np.maximum(pos, 0)
    start = p.starts[pos]
    return valid & (r < start + p.bounds[pos]) & (r <= start + p.widths[pos])


def effective_sparsity(layout: RedGreenLayout, x: SparseVector | PreparedVector) -> float:
    return _as_prepared(layout, x).mass / layout.M


def _cap_for(layout: RedGreenLayout, p: PreparedVector, delta: float, max_iters: int | None) -> int:
    if p.mass <= 0:
        raise UsageError("cannot hash an empty vector")
    if max_iters is not None:
        return max_iters
    return _rng.iteration_cap(min(1.0, p.mass / layout.M), delta)


def hash_one(
    layout: RedGreenLayout,
    x: SparseVector | PreparedVector,
    seed: int,
    *,
    delta: float = DEFAULT_DELTA,
    max_iters: int | None = None,
    trace: list[float] | None = None,
) -> int:
    """Number of chained draws until the first green hit.

    Scalar reference path. ``trace``, if given, receives every draw.
    """
    p = _as_prepared(layout, x)
    cap = _cap_for(layout, p, delta, max_iters)
    green = is_green_binsearch if layout.low_mem else is_green_o1
    gen = _rng.ChainedRng(seed, float(layout.M))
    n = 0
    while True:
        n += 1
        r = _rng.next_uniform(gen)
        if trace is not None:
            trace.append(r)
        if green(layout, p, r):
            return n
        if n >= cap:
            raise IterationCapError(cap, p.mass / layout.M)
        gen = _rng.reseed_from(gen, r)


def hash_values(
    layout: RedGreenLayout,
    x: SparseVector | PreparedVector,
    seeds: np.ndarray | Sequence[int],
    *,
    delta: float = DEFAULT_DELTA,
    max_iters: int | None = None,
    low_mem: bool | None = None,
) -> np.ndarray:
    """Vectorised :func:`hash_one` over many seeds; bit-identical results.

    All chains advance in lock-step and finished chains drop out, so the
    work is the total number of draws, about ``len(seeds) / s_x``.
    """
    p = _as_prepared(layout, x)
    cap = _cap_for(layout, p, delta, max_iters)
    use_bs = layout.low_mem if low_mem is None else (low_mem or layout.low_mem)
    green_fn = _green_binsearch_np if use_bs else _green_o1_np
    scale = float(layout.M)

    states = np.array(seeds, dtype=np.uint64).reshape(-1)
    out = np.zeros(states.size, dtype=np.int64)
    ids = np.arange(states.size)
    n = 0
    while ids.size:
        n += 1
        r = _rng.chain_draws_np(states, scale)
        green = green_fn(layout, p, r)
        out[ids[green]] = n
        red = ~green
        if n >= cap and red.any():
            raise IterationCapError(cap, p.mass / layout.M)
        ids = ids[red]
        states = _rng.reseed_state_np(r[red])
    return out


@dataclass(frozen=True, eq=False)
class Sketch:
    """k hash values for one vector plus what is needed to compare them.

    ``values`` is 1-d for red-green and reduction sketches and ``(k, 2)`` for
    Ioffe's ``(k*, t*)`` pairs.
    """

    values: np.ndarray
    scheme: str
    master_seed: int
    layout_id: int

    @property
    def k(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        return (
            self.scheme == other.scheme
            and self.master_seed == other.master_seed
            and self.layout_id == other.layout_id
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]


def sketch(layout: RedGreenLayout, x: SparseVector | PreparedVector, config: SchemeConfig) -> Sketch:
    if config.k < 1:
        raise UsageError("k must be at least 1")
    seeds = _rng.slot_seeds(config.master_seed, config.k)
    values = hash_values(layout, x, seeds, delta=config.delta, low_mem=config.low_mem)
    return Sketch(values, "redgreen", config.master_seed, layout.layout_id)


def mean_sparsity(ds: Dataset, alpha: float) -> float:
    """Dataset mean of ||alpha x||_1 / sum_i ceil(alpha * max_i)."""
    maxima = ds.maxima[ds.maxima > 0]
    M = float(np.ceil(alpha * maxima).sum())
    if M == 0:
        raise DomainError("all-zero dataset")
    return math.fsum(alpha * l1_norm(v) / M for v in ds) / len(ds)


def optimize_alpha(ds: Dataset, grid: Sequence[float] | None = None) -> float:
    """Grid candidate with the best mean effective sparsity; ties go to the smaller alpha."""
    if len(ds) == 0:
        raise UsageError("dataset is empty")
    grid = DEFAULT_ALPHA_GRID if grid is None else tuple(grid)
    if not grid:
        raise UsageError("alpha grid is empty")
    if any(not a > 0 for a in grid):
        raise UsageError("alpha candidates must be positive")
    best_alpha, best_s = None, -1.0
    for a in sorted(set(grid)):
        s = mean_sparsity(ds, a)
        # integer rescalings tie mathematically; don't let rounding break the tie
        if s > best_s and not math.isclose(s, best_s, rel_tol=1e-12):
            best_alpha, best_s = a, s
    return float(best_alpha)
