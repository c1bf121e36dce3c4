"""Nonclassicality criteria evaluated on a finite number distribution.

All criteria are written in factorial weights ``Q_k = k! P_k``. A positive
margin means the classical bound is broken; violation additionally requires
the margin to exceed a small relative tolerance, since coherent states sit
exactly on every bound.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._jsonio import dumps
from ._numerics import (
    EXP_OVERFLOW,
    VIOLATION_RTOL,
    DimensionError,
    DomainError,
    exceeds,
    exp_tail_scaled,
    factorial_table,
    log_exp_tail_scaled,
)
from .fockstates import FockDistribution
from .majorization import IndexTuple, MajorizationPair, enumerate_pairs, evaluate_pair, pair_matrix

# Majorization pairs grow super-exponentially with the largest index, so the
# default enumeration stops here even for long distributions.
DEFAULT_MAJ_NMAX = 6


@dataclass(frozen=True)
class CriterionVerdict:
    id: str
    margin: float
    violated: bool
    diverged: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "margin", float(self.margin))
        object.__setattr__(self, "violated", bool(self.violated))
        if self.diverged and not self.violated:
            raise ValueError(f"{self.id}: a diverged verdict must be a violation")
        if self.violated and not (self.margin > 0 or self.diverged):
            raise ValueError(f"{self.id}: violation with non-positive margin {self.margin}")

    def renamed(self, new_id: str) -> "CriterionVerdict":
        return CriterionVerdict(new_id, self.margin, self.violated, self.diverged)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "margin": float(self.margin),
            "violated": self.violated,
            "diverged": self.diverged,
        }


@dataclass(frozen=True)
class CertificationReport:
    verdicts: tuple[CriterionVerdict, ...]

    @property
    def witnesses(self) -> list[str]:
        return [v.id for v in self.verdicts if v.violated]

    @property
    def nonclassical(self) -> bool:
        return any(v.violated for v in self.verdicts)

    def __getitem__(self, criterion_id: str) -> CriterionVerdict:
        for v in self.verdicts:
            if v.id == criterion_id:
                return v
        raise KeyError(criterion_id)

    def to_dict(self) -> dict:
        return {
            "nonclassical": self.nonclassical,
            "witnesses": self.witnesses,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


@dataclass(frozen=True)
class CertifyOptions:
    max_s: int = 4
    maj_n_max: int | None = None  # None: min(N, DEFAULT_MAJ_NMAX)
    tol: float = VIOLATION_RTOL
    klyshko: bool = True
    k_infinity: bool = True
    triples: bool = True
    majorization: bool = True


def _weights(dist: FockDistribution | Sequence[float]) -> Sequence[float]:
    if isinstance(dist, FockDistribution):
        return dist.q.q
    return FockDistribution(dist).q.q


def _power(x: float, n: int) -> float:
    return x**n if n else 1.0


def triple(dist: FockDistribution, n: int, m: int, k: int, tol: float = VIOLATION_RTOL) -> CriterionVerdict:
    """``Q_m^(k-n) <= Q_n^(k-m) Q_k^(m-n)`` for ``n <= m <= k``."""
    if not 0 <= n <= m <= k:
        raise DomainError(f"triple needs 0 <= n <= m <= k, got ({n}, {m}, {k})")
    q = _weights(dist)
    if k >= len(q):
        raise DimensionError(f"triple ({n},{m},{k}) needs P_{k}, distribution ends at P_{len(q) - 1}")
    lhs = _power(q[m], k - n)
    rhs = _power(q[n], k - m) * _power(q[k], m - n)
    margin = lhs - rhs
    return CriterionVerdict(f"triple:{n},{m},{k}", margin, exceeds(margin, rhs, tol))


def klyshko(dist: FockDistribution, k: int, tol: float = VIOLATION_RTOL) -> CriterionVerdict:
    """``Q_k^2 <= Q_(k-1) Q_(k+1)``."""
    q = _weights(dist)
    if not 1 <= k <= len(q) - 2:
        raise DimensionError(f"K{k} needs 1 <= k <= N-1 with N = {len(q) - 1}")
    return triple(dist, k - 1, k, k + 1, tol).renamed(f"K{k}")


def k_infinity_lhs(dist: FockDistribution, n: int) -> float:
    """Left side of the K-infinity bound for truncation ``n`` (``inf`` if divergent)."""
    v = k_infinity(dist, n, tol=math.inf)
    if v.diverged:
        return math.inf
    return v.margin + 1.0


def k_infinity(dist: FockDistribution, n: int, tol: float = VIOLATION_RTOL) -> CriterionVerdict:
    """Normalization bound completed by the smallest classical tail through ``P_n``.

    Classical states satisfy ``sum_{k<=n-2} P_k + Q_(n-1) S(Q_n / Q_(n-1)) <= 1``
    with ``S(x) = sum_{m>=0} x^m / (m + n - 1)!``.
    """
    if n < 2:
        raise DomainError(f"Kinf needs N >= 2, got {n}")
    if not isinstance(dist, FockDistribution):
        dist = FockDistribution(dist)
    if n > dist.n_max:
        raise DimensionError(f"Kinf:{n} needs P_{n}, distribution ends at P_{dist.n_max}")
    cid = f"Kinf:{n}"
    p = dist.probs
    q = dist.q.q
    known = math.fsum(p[: n - 1])
    qa, qb = float(q[n - 1]), float(q[n])

    if qb == 0.0:
        tail = float(p[n - 1])
    elif qa == 0.0:
        return CriterionVerdict(cid, math.inf, True, True)
    else:
        x = qb / qa
        if x <= EXP_OVERFLOW:
            tail = qa * exp_tail_scaled(n - 1, x)
        else:
            log_tail = math.log(qa) + log_exp_tail_scaled(n - 1, x)
            if log_tail > 1.0:
                # the bound is exceeded by a factor beyond e**700; report log LHS
                return CriterionVerdict(cid, log_tail, True, True)
            tail = math.exp(log_tail)
    margin = known + tail - 1.0
    return CriterionVerdict(cid, margin, exceeds(margin, 1.0, tol))


def tail_lower_bound(dist: FockDistribution, n: int, k: int) -> float:
    """Classical lower bound on ``Q_k`` for ``k >= n - 1`` implied by ``Q_(n-1)`` and ``Q_n``."""
    q = dist.q.q
    qa, qb = float(q[n - 1]), float(q[n])
    if qa == 0.0:
        return 0.0 if qb == 0.0 else math.inf
    return qa * (qb / qa) ** (k - n + 1)


_ID_PATTERNS = (
    r"K(?:k:)?(\d+)",
    r"Kinf:(\d+)",
    r"triple:(\d+),(\d+),(\d+)",
    r"maj:([\d,]+)\|([\d,]+)",
)


def is_valid_id(criterion_id: str) -> bool:
    return any(re.fullmatch(p, criterion_id.strip()) for p in _ID_PATTERNS)


def highest_index(criterion_id: str) -> int:
    """Largest ``P_k`` index a criterion reads."""
    cid = criterion_id.strip()
    nums = [int(x) for x in re.findall(r"\d+", cid)]
    if not is_valid_id(cid) or not nums:
        raise DomainError(f"unknown criterion id {criterion_id!r}")
    if re.fullmatch(_ID_PATTERNS[0], cid):
        return nums[0] + 1
    return max(nums)


def evaluate(dist: FockDistribution, criterion_id: str, tol: float = VIOLATION_RTOL) -> CriterionVerdict:
    """Evaluate one criterion given its identifier (``K1``, ``Kk:1``, ``Kinf:2``, ``triple:0,1,3``, ``maj:1,1|2,0``)."""
    cid = criterion_id.strip()
    if m := re.fullmatch(r"K(?:k:)?(\d+)", cid):
        return klyshko(dist, int(m.group(1)), tol)
    if m := re.fullmatch(r"Kinf:(\d+)", cid):
        return k_infinity(dist, int(m.group(1)), tol)
    if m := re.fullmatch(r"triple:(\d+),(\d+),(\d+)", cid):
        return triple(dist, *(int(g) for g in m.groups()), tol=tol)
    if m := re.fullmatch(r"maj:([\d,]+)\|([\d,]+)", cid):
        lo = IndexTuple(tuple(int(x) for x in m.group(1).split(",")))
        up = IndexTuple(tuple(int(x) for x in m.group(2).split(",")))
        return evaluate_pair(_weights(dist), MajorizationPair(lo, up), tol).renamed(cid)
    raise DomainError(f"unknown criterion id {criterion_id!r}")


def criterion_ids(n: int, options: CertifyOptions = CertifyOptions()) -> list[str]:
    """Identifiers evaluated by :func:`certify` for a distribution ending at ``P_n``."""
    ids: list[str] = []
    if options.klyshko:
        ids += [f"K{k}" for k in range(1, n)]
    if options.k_infinity:
        ids += [f"Kinf:{m}" for m in range(2, n + 1)]
    if options.triples:
        ids += [
            f"triple:{a},{b},{c}"
            for c in range(2, n + 1)
            for a in range(c - 1)
            for b in range(a + 1, c)
        ]
    if options.majorization and n >= 1 and options.max_s >= 2:
        for pair in _pairs(n, options):
            ids.append(pair.id)
    return ids


def _pairs(n: int, options: CertifyOptions) -> list[MajorizationPair]:
    top = options.maj_n_max if options.maj_n_max is not None else DEFAULT_MAJ_NMAX
    top = min(top, n)
    if top < 1:
        return []
    return enumerate_pairs(top, options.max_s)


def certify(dist: FockDistribution, options: CertifyOptions = CertifyOptions()) -> CertificationReport:
    """Evaluate every configured criterion on ``dist``."""
    if not isinstance(dist, FockDistribution):
        dist = FockDistribution(dist)
    n = dist.n_max
    tol = options.tol
    verdicts: list[CriterionVerdict] = []
    if options.klyshko:
        verdicts += [klyshko(dist, k, tol) for k in range(1, n)]
    if options.k_infinity:
        verdicts += [k_infinity(dist, m, tol) for m in range(2, n + 1)]
    if options.triples:
        verdicts += [
            triple(dist, a, b, c, tol)
            for c in range(2, n + 1)
            for a in range(c - 1)
            for b in range(a + 1, c)
        ]
    if options.majorization and options.max_s >= 2:
        q = dist.q.q
        verdicts += [evaluate_pair(q, pair, tol) for pair in _pairs(n, options)]
    return CertificationReport(tuple(verdicts))


@dataclass(frozen=True)
class MarginTable:
    """Margins of many criteria on many distributions, one row per distribution."""

    ids: tuple[str, ...]
    margins: np.ndarray  # (rows, criteria)
    scales: np.ndarray  # magnitude the strict tolerance is relative to
    violated: np.ndarray

    @property
    def nonclassical(self) -> np.ndarray:
        return self.violated.any(axis=1)


def margin_table(
    probs: np.ndarray, options: CertifyOptions = CertifyOptions()
) -> MarginTable:
    """Vectorized :func:`certify` over the rows of a ``(samples, N+1)`` array.

    Product-type criteria are evaluated with array arithmetic; the K-infinity
    bounds, which need a per-row series, reuse :func:`k_infinity`.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    rows, width = probs.shape
    n = width - 1
    q = probs * factorial_table(n)
    ids: list[str] = []
    lhs_cols: list[np.ndarray] = []
    rhs_cols: list[np.ndarray] = []

    def add(cid: str, lhs: np.ndarray, rhs: np.ndarray) -> None:
        ids.append(cid)
        lhs_cols.append(lhs)
        rhs_cols.append(rhs)

    if options.klyshko:
        for k in range(1, n):
            add(f"K{k}", q[:, k] ** 2, q[:, k - 1] * q[:, k + 1])
    kinf_ids: list[str] = []
    kinf = np.empty((rows, 0))
    if options.k_infinity and n >= 2:
        kinf_ids = [f"Kinf:{m}" for m in range(2, n + 1)]
        kinf = np.array(
            [
                [k_infinity(FockDistribution(row), m, tol=math.inf).margin for m in range(2, n + 1)]
                for row in probs
            ]
        ).reshape(rows, -1)
    if options.triples:
        for c in range(2, n + 1):
            for a in range(c - 1):
                for b in range(a + 1, c):
                    add(f"triple:{a},{b},{c}", q[:, b] ** (c - a), q[:, a] ** (c - b) * q[:, c] ** (b - a))
    if options.majorization and options.max_s >= 2:
        pairs = _pairs(n, options)
        if pairs:
            padded = np.concatenate([q, np.ones((rows, 1))], axis=1)
            lo, up = pair_matrix(pairs)
            lhs = np.prod(padded[:, lo], axis=2)
            rhs = np.prod(padded[:, up], axis=2)
            for j, pair in enumerate(pairs):
                add(pair.id, lhs[:, j], rhs[:, j])

    n_k = (n - 1) if options.klyshko else 0
    lhs = np.stack(lhs_cols, axis=1) if lhs_cols else np.empty((rows, 0))
    rhs = np.stack(rhs_cols, axis=1) if rhs_cols else np.empty((rows, 0))
    prod_margins = lhs - rhs
    margins = np.concatenate([prod_margins[:, :n_k], kinf, prod_margins[:, n_k:]], axis=1)
    scales = np.concatenate([np.abs(rhs[:, :n_k]), np.ones_like(kinf), np.abs(rhs[:, n_k:])], axis=1)
    all_ids = tuple(ids[:n_k] + kinf_ids + ids[n_k:])
    violated = margins > options.tol * np.maximum(1.0, scales)
    return MarginTable(all_ids, margins, scales, violated)
