"""Baseline weighted minwise hashes.

* Ioffe's consistent weighted sampling: exact, O(d) work per hash.
* Weighted-to-unweighted reduction followed by classic minwise hashing with a
  2-universal family modulo the Mersenne prime 2**61 - 1. Exact for integer
  weights only; fractional parts are rounded randomly, which biases the
  estimate.

Both read their randomness from keyed streams so nothing is stored per
coordinate.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .config import SchemeConfig
from .errors import DomainError, UsageError
from .redgreen import Sketch, layout_digest
from .vectors import SparseVector

MERSENNE_61 = (1 << 61) - 1
EMPTY_HASH = (1 << 64) - 1  # larger than any value mod 2**61 - 1

# stream tags keep the schemes' key spaces apart
_IOFFE_TAG = 0x10FFE
_REDUCE_TAG = 0x4EDC
_MINWISE_TAG = 0x3141

# elements per vectorised block (slots x coordinates)
_BLOCK = 1 << 20

_U64 = np.uint64
_P = _U64(MERSENNE_61)
_LO32 = _U64(0xFFFFFFFF)
_LO29 = _U64((1 << 29) - 1)


@dataclass(frozen=True)
class IoffeHash:
    k_star: int
    t_star: int


def _ioffe_core(log_x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row argmin and t for stream uniforms ``u`` of shape (rows, d, 5)."""
    r = _rng.gamma21_np(u[..., 0], u[..., 1])
    c = _rng.gamma21_np(u[..., 2], u[..., 3])
    beta = u[..., 4]
    t = np.floor(log_x / r + beta)
    # a = c / (y * e^r) with y = exp(r (t - beta)), compared in log space
    log_a = np.log(c) - r * (t - beta) - r
    j = np.argmin(log_a, axis=-1)
    return j, t[np.arange(t.shape[0]), j]


def ioffe_hash(x: SparseVector, slot: int, master_seed: int) -> IoffeHash:
    """One Ioffe CWS hash, computed coordinate by coordinate (reference path)."""
    if x.nnz == 0:
        raise UsageError("cannot hash an empty vector")
    best = (math.inf, -1, 0)
    prefix = _rng.derive(master_seed, _IOFFE_TAG, slot)
    for j, xj in x.entries:
        stream = _rng.KeyedStream(_rng.splitmix64(prefix ^ j))
        r = _rng.gamma21(stream)
        c = _rng.gamma21(stream)
        beta = stream.uniform()
        t = math.floor(math.log(xj) / r + beta)
        log_a = math.log(c) - r * (t - beta) - r
        if log_a < best[0]:
            best = (log_a, j, t)
    return IoffeHash(best[1], int(best[2]))


def ioffe_values(x: SparseVector, k: int, master_seed: int) -> np.ndarray:
    """``(k, 2)`` int64 array of (k*, t*) for slots 0..k-1."""
    if x.nnz == 0:
        raise UsageError("cannot hash an empty vector")
    if k < 1:
        raise UsageError("k must be at least 1")
    d = x.nnz
    log_x = np.log(x.weights)
    coord_ids = x.indices.astype(_U64)
    slot_keys = _rng.derive_np(_rng.derive(master_seed, _IOFFE_TAG), np.arange(k, dtype=_U64))
    out = np.empty((k, 2), dtype=np.int64)
    rows = max(1, _BLOCK // d)
    for lo in range(0, k, rows):
        hi = min(k, lo + rows)
        keys = _rng.splitmix64_np(slot_keys[lo:hi, None] ^ coord_ids[None, :])
        j, t = _ioffe_core(log_x, _rng.keyed_uniforms(keys, 5))
        out[lo:hi, 0] = x.indices[j]
        out[lo:hi, 1] = t
    return out


def ioffe_sketch(x: SparseVector, config: SchemeConfig) -> Sketch:
    return Sketch(ioffe_values(x, config.k, config.master_seed), "ioffe", config.master_seed, 0)


@dataclass(frozen=True, eq=False)
class UnweightedSet:
    """Set of (level, coordinate) pairs; level runs from 1."""

    levels: np.ndarray
    coords: np.ndarray
    dim: int

    def __len__(self) -> int:
        return int(self.levels.size)

    def as_set(self) -> set[tuple[int, int]]:
        return set(zip(self.levels.tolist(), self.coords.tolist()))

    def keys(self) -> np.ndarray:
        """Injective integer encoding ``level * dim + coordinate``."""
        if not len(self):
            return np.zeros(0, dtype=_U64)
        top = int(self.levels.max()) * self.dim + self.dim
        if top >= MERSENNE_61:
            raise DomainError(
                f"reduced set too large to encode: level*dim reaches {top}, above 2**61 - 1"
            )
        return self.levels.astype(_U64) * _U64(self.dim) + self.coords.astype(_U64)


def reduce_to_unweighted(x: SparseVector, seed: int) -> UnweightedSet:
    """Replicate each coordinate floor(x_j) times, plus one more with probability frac(x_j)."""
    floor = np.floor(x.weights)
    frac = x.weights - floor
    keys = _rng.derive_np(_rng.derive(seed, _REDUCE_TAG), x.indices.astype(_U64))
    u = _rng.keyed_uniforms(keys, 1)[:, 0]
    counts = floor.astype(np.int64) + ((frac > 0) & (u <= frac))
    total = int(counts.sum())
    coords = np.repeat(x.indices, counts)
    group_start = np.repeat(np.cumsum(counts) - counts, counts)
    levels = np.arange(total, dtype=np.int64) - group_start + 1
    return UnweightedSet(levels, coords, x.dim)


def mulmod61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod 2**61 - 1 for uint64 operands already below the modulus."""
    a = np.asarray(a, dtype=_U64)
    b = np.asarray(b, dtype=_U64)
    a_hi, a_lo = a >> _U64(32), a & _LO32
    b_hi, b_lo = b >> _U64(32), b & _LO32
    hh = a_hi * b_hi
    mid = a_hi * b_lo + a_lo * b_hi
    ll = a_lo * b_lo
    # 2**64 = 8 and 2**61 = 1 (mod p)
    t = (
        (hh << _U64(3))
        + (mid >> _U64(29))
        + ((mid & _LO29) << _U64(32))
        + (ll & _P)
        + (ll >> _U64(61))
    )
    t = (t & _P) + (t >> _U64(61))
    return np.where(t >= _P, t - _P, t)


def _universal_params(master_seed: int, slots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keys = _rng.derive_np(_rng.derive(master_seed, _MINWISE_TAG), slots)
    a = _rng.splitmix64_np(keys) % _U64(MERSENNE_61 - 1) + _U64(1)
    b = _rng.splitmix64_np(keys + _U64(_rng.GOLDEN)) % _P
    return a, b


def universal_hash(keys: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    h = mulmod61(a, keys) + b
    return np.where(h >= _P, h - _P, h)


def minwise_unweighted(S: UnweightedSet, slot: int, master_seed: int) -> int:
    """min over elements of ((a*key + b) mod p); :data:`EMPTY_HASH` for an empty set."""
    if not len(S):
        return EMPTY_HASH
    a, b = _universal_params(master_seed, np.array([slot], dtype=_U64))
    return int(universal_hash(S.keys(), a[0], b[0]).min())


def minwise_values(S: UnweightedSet, k: int, master_seed: int) -> np.ndarray:
    if k < 1:
        raise UsageError("k must be at least 1")
    out = np.full(k, EMPTY_HASH, dtype=_U64)
    if not len(S):
        return out
    keys = S.keys()
    a, b = _universal_params(master_seed, np.arange(k, dtype=_U64))
    rows = max(1, _BLOCK // keys.size)
    for lo in range(0, k, rows):
        hi = min(k, lo + rows)
        h = universal_hash(keys[None, :], a[lo:hi, None], b[lo:hi, None])
        out[lo:hi] = h.min(axis=1)
    return out


def reduction_id(dim: int) -> int:
    return layout_digest(b"WMHR" + struct.pack("<Q", dim))


def reduction_sketch(x: SparseVector, config: SchemeConfig) -> Sketch:
    # one reduction per vector, seeded identically for the whole dataset
    S = reduce_to_unweighted(x, _rng.derive(config.master_seed, _REDUCE_TAG))
    values = minwise_values(S, config.k, config.master_seed)
    return Sketch(values, "reduction", config.master_seed, reduction_id(x.dim))
