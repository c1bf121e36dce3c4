"""Exact classicality test for ``(P0, P1, P2)`` and an explicit coherent-state decomposition.

In the first three probabilities the classical set is cut out by exactly two
inequalities, ``K1`` and ``Kinf:2``. When both hold, the point is a mixture of
the origin (the infinite-intensity limit), the vacuum and one coherent state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import VIOLATION_RTOL, DomainError, log_exp_tail_scaled

_SUM_SLACK = 1e-12


class NotClassicalError(DomainError):
    """A decomposition was requested for a point outside the classical set."""


def _check_triple(p0: float, p1: float, p2: float) -> tuple[float, float, float]:
    vals = tuple(float(x) for x in (p0, p1, p2))
    if not all(math.isfinite(v) and v >= 0 for v in vals):
        raise DomainError(f"probabilities must be finite and non-negative, got {vals}")
    if math.fsum(vals) > 1 + _SUM_SLACK:
        raise DomainError(f"P0 + P1 + P2 = {math.fsum(vals)!r} exceeds 1")
    return vals


def kinf2_value(p0: float, p1: float, p2: float) -> float:
    """``P0 + P1 (exp(x) - 1) / x`` with ``x = 2 P2 / P1``; ``inf`` when it diverges."""
    if p2 == 0.0:
        return p0 + p1
    if p1 == 0.0:
        return math.inf
    log_tail = math.log(p1) + log_exp_tail_scaled(1, 2.0 * p2 / p1)
    if log_tail > 700.0:
        return math.inf
    return p0 + math.exp(log_tail)


@dataclass(frozen=True)
class TripleVerdict:
    k1: float
    kinf2: float
    classical: bool

    @property
    def diverged(self) -> bool:
        return math.isinf(self.kinf2)

    def to_dict(self) -> dict:
        return {"k1": self.k1, "kinf2": self.kinf2, "classical": self.classical}


def decide(p0: float, p1: float, p2: float, tol: float = VIOLATION_RTOL) -> TripleVerdict:
    """Classical iff ``P1^2 - 2 P0 P2 <= tol`` and ``Kinf:2 <= 1 + tol``."""
    p0, p1, p2 = _check_triple(p0, p1, p2)
    k1 = p1 * p1 - 2.0 * p0 * p2
    kinf2 = kinf2_value(p0, p1, p2)
    return TripleVerdict(k1, kinf2, bool(k1 <= tol and kinf2 <= 1.0 + tol))


def coherent_triple(mu: float) -> np.ndarray:
    e = math.exp(-mu)
    return np.array([e, e * mu, e * mu * mu / 2.0])


@dataclass(frozen=True)
class ClassicalDecomposition:
    w_origin: float
    w_vacuum: float
    w_coherent: float
    mu: float

    def reconstruct(self) -> np.ndarray:
        return self.w_vacuum * np.array([1.0, 0.0, 0.0]) + self.w_coherent * coherent_triple(self.mu)

    def to_dict(self) -> dict:
        return {
            "w_origin": self.w_origin,
            "w_vacuum": self.w_vacuum,
            "w_coherent": self.w_coherent,
            "mu": self.mu,
        }


def decompose(p0: float, p1: float, p2: float, tol: float = VIOLATION_RTOL) -> ClassicalDecomposition:
    """Write a classical triple as origin + vacuum + one coherent state.

    Scaling ``P`` by ``eps = 1 / Kinf:2(P)`` moves it onto the ``Kinf:2``
    boundary (the left side is homogeneous of degree one). Along that boundary
    the point splits into the vacuum and a coherent state whose intensity is
    ``mu = 2 P2 / P1``, a scale-invariant ratio.
    """
    verdict = decide(p0, p1, p2, tol)
    if not verdict.classical:
        raise NotClassicalError(
            f"({p0}, {p1}, {p2}) is not classical: k1={verdict.k1:.3g}, kinf2={verdict.kinf2:.3g}"
        )
    p0, p1, p2 = float(p0), float(p1), float(p2)
    if p0 == 0.0 and p1 == 0.0 and p2 == 0.0:
        return ClassicalDecomposition(1.0, 0.0, 0.0, 0.0)
    if p1 == 0.0:
        # p2 is zero too, otherwise Kinf:2 diverges
        return ClassicalDecomposition(1.0 - p0, p0, 0.0, 0.0)

    inv_eps = min(verdict.kinf2, 1.0)  # 1/eps, the mass left after removing the origin
    mu = 2.0 * p2 / p1
    if mu == 0.0:
        w_coherent = p1  # only reachable within tolerance of the K1 boundary
    else:
        w_coherent = math.exp(math.log(p1) + mu - math.log(mu))  # P1 e^mu / mu = 1 / (eps p)
    # p >= 1 holds exactly; rounding at the boundary can push it marginally below
    w_coherent = min(w_coherent, inv_eps)
    w_vacuum = inv_eps - w_coherent
    w_origin = 1.0 - inv_eps
    return ClassicalDecomposition(w_origin, w_vacuum, w_coherent, mu)


def vacuum_ratio(p0: float, p1: float, p2: float) -> float:
    """The ratio ``p = (2 P2' / P1'^2) exp(-2 P2' / P1')`` of the rescaled point ``P' = eps P``."""
    v = decide(p0, p1, p2, tol=math.inf)
    if p1 == 0.0 or math.isinf(v.kinf2):
        raise DomainError("the ratio needs P1 > 0 and a finite Kinf:2")
    eps = 1.0 / v.kinf2
    mu = 2.0 * p2 / p1
    return mu / (eps * p1) * math.exp(-mu)


def cross_validate(p0: float, p1: float, p2: float, n_dirs: int = 5000, tol: float = VIOLATION_RTOL) -> bool:
    """Whether the supporting-hyperplane membership test agrees with :func:`decide`."""
    from .geometry import membership

    _check_triple(p0, p1, p2)
    inside = membership((p0, p1, p2), n_dirs=n_dirs, slice_indices=(0, 1, 2)).inside
    return inside == decide(p0, p1, p2, tol).classical
