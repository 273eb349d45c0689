"""Small shared helpers: exact log2 rounding and the domain-error type."""

from __future__ import annotations

import math


class DomainError(ValueError):
    """Raised when an operation's input violates its stated preconditions."""


def ceil_log2(x: float) -> int:
    """Exact ceil(log2(x)) for a positive float.

    Uses frexp instead of floating log2 so values at or near powers of two
    never round to the wrong level index.
    """
    if x <= 0:
        raise DomainError(f"ceil_log2 requires x > 0, got {x!r}")
    mantissa, exponent = math.frexp(x)  # x = mantissa * 2**exponent, mantissa in [0.5, 1)
    return exponent - 1 if mantissa == 0.5 else exponent


def floor_log2(x: float) -> int:
    """Exact floor(log2(x)) for a positive float."""
    if x <= 0:
        raise DomainError(f"floor_log2 requires x > 0, got {x!r}")
    mantissa, exponent = math.frexp(x)
    return exponent - 1
