"""Majorization order on integer tuples and the product bounds it induces.

For classical states ``prod_i Q[I_i] <= prod_i Q[J_i]`` whenever ``I`` is
majorized by ``J`` (Muirhead's inequality applied to Poisson mixtures).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._numerics import VIOLATION_RTOL, DimensionError, DomainError, exceeds


class Order(enum.Enum):
    EQUAL = "Equal"
    LESS_EQ = "LessEq"
    GREATER_EQ = "GreaterEq"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True, order=True)
class IndexTuple:
    """Non-negative integers kept in non-increasing order."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = tuple(int(e) for e in self.entries)
        if any(v < 0 for v in vals):
            raise DomainError(f"tuple entries must be non-negative: {vals}")
        object.__setattr__(self, "entries", tuple(sorted(vals, reverse=True)))

    @classmethod
    def of(cls, *entries: int) -> "IndexTuple":
        if len(entries) == 1 and not isinstance(entries[0], int):
            entries = tuple(entries[0])
        return cls(tuple(entries))

    @property
    def total(self) -> int:
        return sum(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def padded(self, length: int) -> tuple[int, ...]:
        return self.entries + (0,) * (length - len(self.entries))

    def __str__(self) -> str:
        return ",".join(map(str, self.entries))


def compare(i: IndexTuple, j: IndexTuple) -> Order:
    """Majorization comparison of two tuples with equal totals."""
    if i.total != j.total:
        raise DomainError(f"majorization needs equal totals, got {i.total} and {j.total}")
    length = max(len(i), len(j))
    pi = np.cumsum(i.padded(length))
    pj = np.cumsum(j.padded(length))
    le = bool(np.all(pi <= pj))
    ge = bool(np.all(pi >= pj))
    if le and ge:
        return Order.EQUAL
    if le:
        return Order.LESS_EQ
    if ge:
        return Order.GREATER_EQ
    return Order.INCOMPARABLE


@dataclass(frozen=True)
class MajorizationPair:
    """A strict relation ``lower`` < ``upper``; ``covering`` marks adjacent pairs."""

    lower: IndexTuple
    upper: IndexTuple
    covering: bool = False

    def __post_init__(self) -> None:
        if compare(self.lower, self.upper) is not Order.LESS_EQ:
            raise DomainError(f"({self.lower}) is not strictly majorized by ({self.upper})")

    @property
    def id(self) -> str:
        return f"maj:{self.lower}|{self.upper}"

    @property
    def length(self) -> int:
        return max(len(self.lower), len(self.upper))

    def indices(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Both tuples zero-padded to the common length."""
        return self.lower.padded(self.length), self.upper.padded(self.length)

    def to_dict(self) -> dict:
        lo, up = self.indices()
        return {"I": list(lo), "J": list(up)}


def _canonical(lo: tuple[int, ...], up: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # a shared trailing zero only multiplies both sides by Q_0
    while len(lo) > 2 and lo[-1] == 0 and up[-1] == 0:
        lo, up = lo[:-1], up[:-1]
    return lo, up


def enumerate_pairs(n_max: int, s: int) -> list[MajorizationPair]:
    """All strict pairs among length-``s`` tuples with entries in ``0..n_max``.

    Pairs that differ only by common zero padding are identified with their
    shortest form. Sorted by ``(total, I, J)``.
    """
    if s < 2 or n_max < 1:
        raise DomainError("enumerate_pairs needs s >= 2 and n_max >= 1")
    by_total: dict[int, list[tuple[int, ...]]] = {}
    for combo in itertools.combinations_with_replacement(range(n_max, -1, -1), s):
        by_total.setdefault(sum(combo), []).append(combo)

    seen: dict[tuple[tuple[int, ...], tuple[int, ...]], bool] = {}
    for total, tuples in by_total.items():
        prefix = {t: np.cumsum(t) for t in tuples}
        less = {
            (a, b)
            for a in tuples
            for b in tuples
            if a != b and np.all(prefix[a] <= prefix[b])
        }
        for a, b in less:
            covering = not any((a, c) in less and (c, b) in less for c in tuples)
            key = _canonical(a, b)
            seen[key] = seen.get(key, False) or covering

    pairs = [
        MajorizationPair(IndexTuple(lo), IndexTuple(up), covering)
        for (lo, up), covering in seen.items()
    ]
    pairs.sort(key=lambda p: (p.lower.total, p.indices()[0], p.indices()[1]))
    return pairs


def log_product(q: Sequence[float], idx: Iterable[int]) -> float:
    """``sum_i log Q[idx_i]`` (``-inf`` when any factor vanishes)."""
    total = 0.0
    for i in idx:
        if q[i] <= 0:
            return -math.inf
        total += math.log(q[i])
    return total


def _product(q: Sequence[float], idx: Iterable[int]) -> float:
    out = 1.0
    for i in idx:
        out *= q[i]
    return out


def evaluate_pair(q, pair: MajorizationPair, tol: float = VIOLATION_RTOL):
    """Margin ``prod Q[I] - prod Q[J]`` of one majorization bound.

    ``q`` is a :class:`~fockcert.fockstates.FactorialWeights` or any indexable
    sequence of factorial weights.
    """
    from .criteria import CriterionVerdict

    values = getattr(q, "q", q)
    lo, up = pair.indices()
    top = max(lo + up)
    if top >= len(values):
        raise DimensionError(f"{pair.id} needs Q_{top} but only Q_0..Q_{len(values) - 1} are known")
    lhs = _product(values, lo)
    rhs = _product(values, up)
    margin = lhs - rhs
    return CriterionVerdict(pair.id, margin, exceeds(margin, rhs, tol))


def pair_matrix(pairs: Sequence[MajorizationPair]) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (padded with ``-1``) for vectorized evaluation of many pairs."""
    width = max(p.length for p in pairs)
    lo = np.full((len(pairs), width), -1, dtype=int)
    up = np.full((len(pairs), width), -1, dtype=int)
    for r, p in enumerate(pairs):
        a, b = p.indices()
        lo[r, : len(a)] = a
        up[r, : len(b)] = b
    return lo, up


def batch_margins(q: np.ndarray, pairs: Sequence[MajorizationPair]) -> np.ndarray:
    """Margins of ``pairs`` for each row of a ``(samples, N+1)`` array of weights."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    padded = np.concatenate([q, np.ones((q.shape[0], 1))], axis=1)  # index -1 -> factor 1
    lo, up = pair_matrix(pairs)
    return np.prod(padded[:, lo], axis=2) - np.prod(padded[:, up], axis=2)
