"""Sparse non-negative vectors, datasets, and the ``label idx:val`` text format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, FormatError, ParseError, UsageError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Non-negative vector stored as strictly increasing indices and positive weights.

    Use :meth:`from_pairs` to build one from unsorted input; the constructor
    only validates.
    """

    indices: np.ndarray
    weights: np.ndarray
    dim: int
    label: str | None = None

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if idx.shape != w.shape:
            raise UsageError("indices and weights must have the same length")
        if self.dim < 1:
            raise UsageError(f"dimension must be positive, got {self.dim}")
        if not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise DomainError(f"index out of range [0, {self.dim})")
            if np.any(np.diff(idx) <= 0):
                raise FormatError("indices must be strictly increasing without duplicates")
        keep = w > 0
        if not keep.all():
            idx, w = idx[keep], w[keep]
        object.__setattr__(self, "indices", _frozen(idx.copy()))
        object.__setattr__(self, "weights", _frozen(w.copy()))

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[int, float]], dim: int | None = None, label: str | None = None
    ) -> "SparseVector":
        pairs = sorted((int(i), float(v)) for i, v in pairs)
        for (a, _), (b, _) in zip(pairs, pairs[1:]):
            if a == b:
                raise FormatError(f"duplicate index {a}")
        idx = np.array([p[0] for p in pairs], dtype=np.int64)
        w = np.array([p[1] for p in pairs], dtype=np.float64)
        if dim is None:
            dim = int(idx[-1]) + 1 if idx.size else 1
        return cls(idx, w, dim, label)

    @classmethod
    def from_dense(cls, dense: Sequence[float] | np.ndarray, label: str | None = None) -> "SparseVector":
        dense = np.asarray(dense, dtype=np.float64)
        nz = np.flatnonzero(dense)
        return cls(nz, dense[nz], max(dense.size, 1), label)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.weights.tolist()))

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.weights
        return out

    def with_dim(self, dim: int) -> "SparseVector":
        return SparseVector(self.indices, self.weights, dim, self.label)

    def __len__(self) -> int:
        return self.nnz

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SparseVector(dim={self.dim}, entries={self.entries!r})"


def l1_norm(x: SparseVector) -> float:
    # fsum keeps the result independent of entry order
    return math.fsum(x.weights.tolist())


def _where(lineno: int | None, col: int) -> str:
    return f"line {lineno}, column {col}: " if lineno is not None else f"column {col}: "


def parse_sparse_line(
    line: str, *, base: int = 0, dim: int | None = None, lineno: int | None = None
) -> SparseVector:
    """Parse one ``label idx:val idx:val ...`` line.

    The leading label is kept on the vector but never hashed. Zero weights
    are dropped; a negative weight raises :class:`DomainError` and a repeated
    index raises :class:`FormatError`.

    >>> parse_sparse_line("1 0:1.5 3:2.0", dim=4).entries
    [(0, 1.5), (3, 2.0)]
    """
    if base not in (0, 1):
        raise UsageError(f"index base must be 0 or 1, got {base}")
    tokens: list[tuple[int, str]] = []
    pos = 0
    for tok in line.split():
        col = line.index(tok, pos)
        pos = col + len(tok)
        tokens.append((col + 1, tok))
    if not tokens:
        raise ParseError("empty line", lineno)
    label = tokens[0][1]
    if ":" in label:
        raise ParseError(f"missing label before {label!r}", lineno, tokens[0][0])

    seen: set[int] = set()
    pairs: list[tuple[int, float]] = []
    for col, tok in tokens[1:]:
        key, sep, val = tok.partition(":")
        if not sep:
            raise ParseError(f"expected idx:val, got {tok!r}", lineno, col)
        try:
            idx = int(key) - base
            weight = float(val)
        except ValueError:
            raise ParseError(f"malformed token {tok!r}", lineno, col) from None
        if idx < 0:
            raise ParseError(f"index {key} below base {base}", lineno, col)
        if dim is not None and idx >= dim:
            raise ParseError(f"index {key} outside dimension {dim}", lineno, col)
        if not math.isfinite(weight):
            raise DomainError(f"{_where(lineno, col)}non-finite weight {val!r}")
        if weight < 0:
            raise DomainError(f"{_where(lineno, col)}negative weight {val!r}")
        if idx in seen:
            raise FormatError(f"duplicate index {key}", lineno, col)
        seen.add(idx)
        pairs.append((idx, weight))
    return SparseVector.from_pairs(pairs, dim=dim, label=label)


def format_sparse_line(x: SparseVector, *, base: int = 0) -> str:
    label = x.label if x.label is not None else "0"
    body = " ".join(f"{i + base}:{w!r}" for i, w in x.entries)
    return f"{label} {body}".rstrip()


@dataclass(frozen=True, eq=False)
class Dataset:
    vectors: tuple[SparseVector, ...]
    dim: int
    maxima: np.ndarray = field(repr=False)

    @classmethod
    def from_vectors(cls, vectors: Iterable[SparseVector], dim: int | None = None) -> "Dataset":
        vectors = list(vectors)
        inferred = max((v.dim for v in vectors), default=1)
        if dim is None:
            dim = inferred
        elif inferred > dim and any(v.nnz and v.indices[-1] >= dim for v in vectors):
            raise UsageError(f"vectors exceed declared dimension {dim}")
        vectors = tuple(v if v.dim == dim else v.with_dim(dim) for v in vectors)
        maxima = np.zeros(dim)
        for v in vectors:
            np.maximum.at(maxima, v.indices, v.weights)
        return cls(vectors, dim, _frozen(maxima))

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self) -> Iterator[SparseVector]:
        return iter(self.vectors)

    def __getitem__(self, i: int) -> SparseVector:
        return self.vectors[i]


def dataset_maxima(ds: Dataset) -> np.ndarray:
    if len(ds) == 0:
        raise UsageError("dataset is empty")
    return ds.maxima


def iter_sparse_lines(
    lines: Iterable[str], *, base: int = 0, dim: int | None = None
) -> Iterator[SparseVector]:
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield parse_sparse_line(stripped, base=base, dim=dim, lineno=lineno)


def load_dataset(path: str | Path, *, base: int = 0, dim: int | None = None) -> Dataset:
    """Read a sparse text file. ``dim`` defaults to max index + 1 over the file."""
    return load_dataset_with_lines(path, base=base, dim=dim)[0]


def load_dataset_with_lines(
    path: str | Path, *, base: int = 0, dim: int | None = None
) -> tuple[Dataset, list[int]]:
    """Like :func:`load_dataset`, also returning each vector's 1-based source line."""
    vectors: list[SparseVector] = []
    linenos: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            vectors.append(parse_sparse_line(stripped, base=base, dim=dim, lineno=lineno))
            linenos.append(lineno)
    if not vectors:
        raise UsageError(f"{path}: no vectors found")
    return Dataset.from_vectors(vectors, dim), linenos


def write_dataset(ds: Dataset | Iterable[SparseVector], path: str | Path, *, base: int = 0) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in ds:
            fh.write(format_sparse_line(v, base=base) + "\n")
