"""Deterministic uniform streams built on the SplitMix64 mixer.

Two kinds of randomness live here:

* :class:`ChainedRng` produces the shared sequence r_1, r_2, ... consumed by
  the rejection-sampling hash. After a rejected draw ``r`` the generator is
  reseeded with ``ceil(r * 10**6)``, so the whole sequence is a pure function
  of the slot seed and never of the vector being hashed.
* Keyed streams (``derive`` + ``keyed_uniforms``) give reproducible
  per-(slot, coordinate) randomness for the baselines without storing a
  seed matrix.

Every scalar routine has a numpy twin operating on ``uint64`` arrays; the
two are bit-identical and the tests hold them to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_M53 = 2.0**-53

RESEED_SCALE = 1_000_000

_U64 = np.uint64
_GOLDEN_NP = _U64(GOLDEN)
_M1_NP = _U64(_M1)
_M2_NP = _U64(_M2)


def splitmix64(state: int) -> int:
    z = (state + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64_np(state: np.ndarray) -> np.ndarray:
    z = np.asarray(state, dtype=_U64) + _GOLDEN_NP
    z = (z ^ (z >> _U64(30))) * _M1_NP
    z = (z ^ (z >> _U64(27))) * _M2_NP
    return z ^ (z >> _U64(31))


def derive(*parts: int) -> int:
    """Fold integers into one 64-bit key. Order matters."""
    h = 0
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def derive_np(key: int, ids: np.ndarray) -> np.ndarray:
    """Vectorised ``derive(..., id)`` for a precomputed prefix ``key``.

    ``derive_np(derive(a, b), ids)[n] == derive(a, b, ids[n])``.
    """
    return splitmix64_np(_U64(key) ^ np.asarray(ids, dtype=_U64))


def slot_seeds(master_seed: int, k: int) -> np.ndarray:
    """Seeds for hash slots ``0..k-1``; slot ``i`` gets ``derive(master_seed, i)``."""
    return derive_np(derive(master_seed), np.arange(k, dtype=_U64))


def unit(bits: int) -> float:
    """Top 53 bits of a 64-bit word as a real in [0, 1)."""
    return (bits >> 11) * _TWO_M53


def unit_np(bits: np.ndarray) -> np.ndarray:
    return (bits >> _U64(11)).astype(np.float64) * _TWO_M53


def open_unit_np(bits: np.ndarray) -> np.ndarray:
    """Like :func:`unit_np` but shifted half a step, so never 0 (safe for log)."""
    return ((bits >> _U64(11)).astype(np.float64) + 0.5) * _TWO_M53


@dataclass(frozen=True)
class ChainedRng:
    state: int
    scale: float

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "state", int(self.state) & MASK64)


def next_uniform(rng: ChainedRng) -> float:
    """The real in [0, scale) attached to the current state. Does not advance."""
    return rng.scale * unit(splitmix64(rng.state))


def reseed_from(rng: ChainedRng, r: float) -> ChainedRng:
    return ChainedRng(reseed_state(r), rng.scale)


def reseed_state(r: float) -> int:
    return math.ceil(r * RESEED_SCALE) & MASK64


def chain_draws_np(states: np.ndarray, scale: float) -> np.ndarray:
    return scale * unit_np(splitmix64_np(states))


def reseed_state_np(r: np.ndarray) -> np.ndarray:
    return np.ceil(r * RESEED_SCALE).astype(_U64)


def iteration_cap(sparsity: float, delta: float) -> int:
    """Smallest n with (1 - s)^n <= delta: the rejection loop's hard limit."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not 0 < sparsity <= 1:
        raise ValueError(f"sparsity must lie in (0, 1], got {sparsity}")
    if sparsity == 1:
        return 1
    return max(1, math.ceil(math.log(delta) / math.log1p(-sparsity)))


class KeyedStream:
    """Sequential uniforms from one 64-bit key: u_n = f(splitmix64(key + n*GOLDEN))."""

    __slots__ = ("key", "counter")

    def __init__(self, key: int) -> None:
        self.key = key & MASK64
        self.counter = 0

    def uniform(self) -> float:
        """Uniform on the open interval (0, 1)."""
        bits = splitmix64((self.key + self.counter * GOLDEN) & MASK64)
        self.counter += 1
        return ((bits >> 11) + 0.5) * _TWO_M53


def keyed_uniforms(keys: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` stream uniforms for every key; shape ``keys.shape + (n,)``.

    Matches ``KeyedStream(key).uniform()`` called ``n`` times.
    """
    keys = np.asarray(keys, dtype=_U64)
    out = np.empty(keys.shape + (n,))
    for c in range(n):
        out[..., c] = open_unit_np(splitmix64_np(keys + _U64((c * GOLDEN) & MASK64)))
    return out


def gamma21(stream: KeyedStream) -> float:
    """Gamma(2, 1) variate as the sum of two unit exponentials."""
    return -math.log(stream.uniform()) - math.log(stream.uniform())


def gamma21_np(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    return -np.log(u1) - np.log(u2)
