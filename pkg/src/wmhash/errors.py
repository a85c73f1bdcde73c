"""Exception hierarchy shared by the library and the CLI.

The CLI maps ``UsageError`` (and I/O failures) to exit code 2 and every
other ``WMHError`` to exit code 1.
"""

from __future__ import annotations


class WMHError(Exception):
    """Base class for all library errors."""


class UsageError(WMHError, ValueError):
    """Degenerate or contradictory request (k=0, empty grid, empty dataset...)."""


class DomainError(WMHError, ValueError):
    """A value lies outside the mathematical domain (negative weight, r out of range)."""


class ParseError(WMHError, ValueError):
    """Malformed sparse text input."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class FormatError(ParseError):
    """Well-formed tokens that violate the format contract (e.g. duplicate index)."""


class ResourceError(WMHError):
    """A lookup table would exceed the configured memory budget."""


class IterationCapError(WMHError):
    """Rejection sampling hit its iteration cap."""

    def __init__(self, max_iters: int, sparsity: float):
        self.max_iters = max_iters
        self.sparsity = sparsity
        super().__init__(
            f"rejection sampling exceeded {max_iters} iterations "
            f"(effective sparsity s_x={sparsity:.3g}); rescale the data or raise --delta"
        )


class LayoutMismatchError(WMHError):
    """A vector does not fit inside the layout it is hashed against."""


class IncompatibleSketchError(WMHError):
    """Two sketches cannot be compared."""

    def __init__(self, field: str, a: object, b: object):
        self.field = field
        super().__init__(f"sketches differ in {field}: {a!r} != {b!r}")
