from __future__ import annotations

from dataclasses import dataclass

from .errors import UsageError

SCHEMES = ("redgreen", "ioffe", "reduction")
DEFAULT_DELTA = 1e-12


@dataclass(frozen=True)
class SchemeConfig:
    """Parameters shared by every sketching scheme.

    ``alpha`` is either a positive float or the string ``"auto"``; only the
    red-green scheme reads it. ``delta`` sets the rejection-loop cap through
    the geometric tail bound.
    """

    scheme: str = "redgreen"
    k: int = 500
    master_seed: int = 0
    alpha: float | str = 1.0
    delta: float = DEFAULT_DELTA
    low_mem: bool = False

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise UsageError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise UsageError(f"k must be a positive integer, got {self.k!r}")
        if not 0 <= self.master_seed < 2**64:
            raise UsageError("master seed must be a 64-bit unsigned integer")
        if self.alpha != "auto":
            if isinstance(self.alpha, str) or not self.alpha > 0:
                raise UsageError(f"alpha must be positive or 'auto', got {self.alpha!r}")
        if not 0 < self.delta < 1:
            raise UsageError(f"delta must lie in (0, 1), got {self.delta}")
