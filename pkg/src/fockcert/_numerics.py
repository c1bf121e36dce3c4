"""Shared numerical helpers: tolerances, factorial tables, exponential tails."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammainc

# Relative tolerance for declaring a strict violation. Coherent states sit
# exactly on every boundary, so equality must never count as a violation.
VIOLATION_RTOL = 1e-12

# exp(x) overflows double precision just above 709.
EXP_OVERFLOW = 700.0


class DomainError(ValueError):
    """Raised when an argument lies outside the mathematical domain of an operation."""


class DimensionError(ValueError):
    """Raised when a requested index exceeds what a distribution provides."""


def exceeds(margin: float, scale: float = 1.0, tol: float = VIOLATION_RTOL) -> bool:
    """Return True when ``margin`` is strictly positive beyond ``tol * max(1, |scale|)``."""
    return bool(margin > tol * max(1.0, abs(scale)))


@lru_cache(maxsize=None)
def factorial(k: int) -> float:
    """k! from exact integer arithmetic, promoted to float."""
    return float(math.factorial(k))


def factorial_table(n: int) -> np.ndarray:
    """Array ``[0!, 1!, ..., n!]`` as floats."""
    return np.array([factorial(k) for k in range(n + 1)], dtype=float)


def exp_tail_scaled(n: int, x: float) -> float:
    """Return ``sum_{m>=0} x**m / (m + n)!`` for ``x >= 0``.

    Equivalent to ``(exp(x) - sum_{k<n} x**k/k!) / x**n`` but free of the
    cancellation that formula suffers for small ``x``.
    """
    if x < 0:
        raise DomainError(f"exp_tail_scaled needs x >= 0, got {x}")
    if x == 0.0:
        return 1.0 / factorial(n)
    if n == 0:
        return math.exp(x)
    if n == 1:
        return math.expm1(x) / x
    if x <= n + 30.0:
        term = 1.0 / factorial(n)
        terms = [term]
        running = term
        m = 0
        while True:
            m += 1
            term *= x / (m + n)
            terms.append(term)
            running += term
            if m > x and term < 1e-18 * running:
                break
        return math.fsum(terms)
    # x well above n: the regularized incomplete gamma is close to 1, no cancellation.
    return math.exp(x - n * math.log(x)) * float(gammainc(n, x))


def log_exp_tail_scaled(n: int, x: float) -> float:
    """Natural log of :func:`exp_tail_scaled`, safe for ``x`` beyond the overflow limit."""
    if x <= EXP_OVERFLOW:
        return math.log(exp_tail_scaled(n, x))
    if n == 0:
        return x
    return x - n * math.log(x) + math.log(float(gammainc(n, x)))


def bisect_predicate(
    pred: Callable[[float], bool], lo: float, hi: float, xtol: float = 1e-12
) -> float:
    """Locate where a boolean predicate flips between ``lo`` and ``hi``.

    ``pred(lo)`` and ``pred(hi)`` must differ. Returns the midpoint of the
    final bracket, whose width is below ``xtol``.
    """
    plo = pred(lo)
    if plo == pred(hi):
        raise DomainError("predicate does not change between the bracket ends")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == plo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fmt_float(x: float, digits: int) -> str:
    """Format a float with ``digits`` significant digits; non-finite values as inf/-inf/nan."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{digits}g")
