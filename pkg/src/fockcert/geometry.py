"""Supporting hyperplanes of the classical set in low-dimensional probability slices.

Classical points are mixtures of coherent states, so in a slice spanned by
``P_i`` (``i`` in ``indices``) the classical region is the convex hull of the
curve ``lambda -> (e^-lambda lambda^i / i!)_i`` together with its limit, the
origin. A convex hull equals the intersection of the half-spaces
``<n, x> <= F_max(n)`` where ``F_max(n) = max_lambda <n, curve(lambda)>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from ._numerics import DomainError, bisect_predicate, factorial

TIE_TOL = 1e-10  # maximizers within this of F_max are all reported
MEMBERSHIP_TOL = 1e-9
_LOG_LAMBDA_MAX = 40.0  # search window for log(1 + lambda) in the numerical fallback


class NoInflectionError(ValueError):
    """The ``(P0, P1)`` coherent curve is convex and has no inflection point."""


class ClosureError(RuntimeError):
    """The tangency equation for the convex closure could not be bracketed."""


@dataclass(frozen=True)
class Slice:
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if len(idx) not in (2, 3):
            raise DomainError(f"a slice needs 2 or 3 indices, got {idx}")
        if any(i < 0 for i in idx) or any(a >= b for a, b in zip(idx, idx[1:])):
            raise DomainError(f"slice indices must be strictly increasing and non-negative: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def quadratic(self) -> bool:
        """True when the support function has a closed form (all indices at most 2)."""
        return self.indices[-1] <= 2

    def __str__(self) -> str:
        return ",".join(map(str, self.indices))


def as_slice(s: Slice | Sequence[int]) -> Slice:
    return s if isinstance(s, Slice) else Slice(tuple(s))


def direction_2d(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def direction_3d(theta: float, phi: float) -> np.ndarray:
    st = math.sin(theta)
    return np.array([math.cos(theta), st * math.cos(phi), st * math.sin(phi)])


def coherent_curve(s: Slice | Sequence[int], lam: float) -> np.ndarray:
    """Point of a coherent state with intensity ``lam`` (``inf`` gives the origin)."""
    s = as_slice(s)
    if math.isinf(lam):
        return np.zeros(s.dim)
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    e = math.exp(-lam)
    return np.array([e * lam**i / factorial(i) for i in s.indices])


@dataclass(frozen=True)
class SupportValue:
    f_max: float
    maximizers: tuple[float, ...]  # math.inf stands for the origin
    region: str | None = None


def functional(s: Slice, n: Sequence[float], lam: float) -> float:
    """``<n, curve(lam)>``."""
    return float(np.dot(n, coherent_curve(s, lam)))


# -- closed form for slices inside (P0, P1, P2) ------------------------------


def _quadratic_coeffs(s: Slice, n: Sequence[float]) -> tuple[float, float, float]:
    coeffs = [0.0, 0.0, 0.0]
    for i, v in zip(s.indices, n):
        coeffs[i] = float(v)
    return coeffs[0], coeffs[1], coeffs[2]


def _quad_value(a: float, b: float, c: float, lam: float) -> float:
    if math.isinf(lam):
        return 0.0
    return math.exp(-lam) * (a + b * lam + 0.5 * c * lam * lam)


def lambda_plus(a: float, b: float, c: float) -> float | None:
    """The local maximum of ``e^-lam (a + b lam + c lam^2 / 2)``, or None if there is none.

    May be negative; callers decide whether it is admissible.
    """
    if c == 0.0:
        return 1.0 - a / b if b > 0 else None
    disc = c * c + b * b - 2.0 * a * c
    if disc < 0:
        return None
    root = math.sqrt(disc)
    u = c - b
    if u < 0:
        # avoid cancellation in u + root
        return -2.0 * (b - a) / (u - root)
    return (u + root) / c


class Region(enum.IntEnum):
    """Stationary structure of ``f(lam) = e^-lam (a + b lam + c lam^2 / 2)``."""

    NO_STATIONARY = 0  # no real stationary point
    NEGATIVE_STATIONARY = 1  # the local maximum lies at lam < 0
    STATIONARY_BELOW_ZERO = 2  # admissible local maximum with f < 0
    STATIONARY_MAX = 3  # admissible local maximum above both ends
    VACUUM_DOMINATES = 4  # admissible local maximum, f >= 0 but f(0) larger


def classify(a: float, b: float, c: float) -> Region:
    lp = lambda_plus(a, b, c)
    if lp is None:
        return Region.NO_STATIONARY
    if lp < 0:
        return Region.NEGATIVE_STATIONARY
    v = _quad_value(a, b, c, lp)
    if v < 0:
        return Region.STATIONARY_BELOW_ZERO
    if a >= v:
        return Region.VACUUM_DOMINATES
    return Region.STATIONARY_MAX


def _ties(candidates: Iterable[tuple[float, float]], tol: float = TIE_TOL) -> SupportValue:
    cands = list(candidates)
    best = max(v for _, v in cands)
    lams = sorted({lam for lam, v in cands if v >= best - tol})
    return SupportValue(best, tuple(lams))


def support_quadratic(a: float, b: float, c: float) -> SupportValue:
    """Exact ``F_max`` for ``e^-lam (a + b lam + c lam^2 / 2)`` over ``[0, inf]``."""
    a, b, c = float(a), float(b), float(c)
    cands = [(0.0, a), (math.inf, 0.0)]
    lp = lambda_plus(a, b, c)
    if lp is not None and lp >= 0 and math.isfinite(lp):
        cands.append((lp, _quad_value(a, b, c, lp)))
    sv = _ties(cands)
    return SupportValue(sv.f_max, sv.maximizers, classify(a, b, c).name.lower())


# -- numerical fallback for general slices ----------------------------------


def _support_numeric(s: Slice, n: Sequence[float], grid: int = 2001) -> SupportValue:
    idx = np.array(s.indices)
    coef = np.asarray(n, dtype=float) / np.array([factorial(i) for i in s.indices])

    def f_of_u(u):
        lam = np.expm1(u)
        return np.exp(-lam) * np.sum(coef[:, None] * lam[None, :] ** idx[:, None], axis=0)

    u = np.linspace(0.0, _LOG_LAMBDA_MAX, grid)
    vals = f_of_u(u)
    cands = [(0.0, float(coef[0]) if s.indices[0] == 0 else 0.0), (math.inf, 0.0)]
    step = u[1] - u[0]
    # strict rise on the left skips the exactly-zero plateau where exp(-lam) underflows
    inner = vals[1:-1]
    peaks = np.flatnonzero((inner > vals[:-2]) & (inner >= vals[2:]) & (inner != 0.0)) + 1
    for j in peaks:
        res = minimize_scalar(
            lambda x: -float(f_of_u(np.array([x]))[0]),
            bounds=(u[j] - step, u[j] + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        cands.append((float(np.expm1(res.x)), -float(res.fun)))
    return _ties(cands)


def support(s: Slice | Sequence[int], n: Sequence[float]) -> SupportValue:
    """``F_max`` in direction ``n`` (need not be normalized) together with its maximizers."""
    s = as_slice(s)
    n = np.asarray(n, dtype=float)
    if n.shape != (s.dim,):
        raise DomainError(f"direction has {n.size} components, slice has {s.dim}")
    if s.quadratic:
        return support_quadratic(*_quadratic_coeffs(s, n))
    return _support_numeric(s, n)


# -- (P0, P1) and (P0, P2) in closed form ------------------------------------


def _theta0_equation(theta: float) -> float:
    cot = 1.0 / math.tan(theta)
    r = math.sqrt(max(0.0, 1.0 - 2.0 * cot))
    return math.exp(-1.0 - r) * (1.0 + r) - cot


@lru_cache(maxsize=None)
def theta0() -> float:
    """Direction at which the ``(P0, P2)`` support touches the vacuum and the curve at once."""
    lo = math.atan(2.0)  # arccot(1/2)
    hi = 0.5 * math.pi
    return bisect_predicate(lambda t: _theta0_equation(t) > 0, lo, hi, xtol=1e-12)


def _wrap(theta: float) -> float:
    return theta % (2.0 * math.pi)


def _f_max_p01(theta: float) -> tuple[float, float]:
    t = _wrap(theta)
    if t <= 0.25 * math.pi or t >= 1.5 * math.pi:
        return math.cos(t), 0.0
    if t < math.pi:
        cot = 1.0 / math.tan(t)
        return math.exp(-1.0 + cot) * math.sin(t), 1.0 - cot
    return 0.0, math.inf


def _f_max_p02(theta: float) -> tuple[float, float]:
    t = _wrap(theta)
    if t <= theta0() or t >= 1.5 * math.pi:
        return math.cos(t), 0.0
    if t < math.pi:
        cot = 1.0 / math.tan(t)
        lam = 1.0 + math.sqrt(1.0 - 2.0 * cot)
        return math.exp(-lam) * (math.cos(t) + 0.5 * math.sin(t) * lam * lam), lam
    return 0.0, math.inf


def f_max_2d(s: Slice | Sequence[int], theta: float) -> SupportValue:
    """Support function of a 2D slice in direction ``(cos theta, sin theta)``.

    ``(P0, P1)`` and ``(P0, P2)`` use their piecewise closed forms; other
    slices are maximized numerically over ``lambda``.
    """
    s = as_slice(s)
    if s.dim != 2:
        raise DomainError("f_max_2d needs a two-dimensional slice")
    n = direction_2d(theta)
    if s.indices in ((0, 1), (0, 2)):
        value, lam = (_f_max_p01 if s.indices == (0, 1) else _f_max_p02)(theta)
        a, b, c = _quadratic_coeffs(s, n)
        cands = [(0.0, a), (math.inf, 0.0), (lam, _quad_value(a, b, c, lam))]
        lp = lambda_plus(a, b, c)
        if lp is not None and lp >= 0 and math.isfinite(lp):
            cands.append((lp, _quad_value(a, b, c, lp)))
        lams = sorted({x for x, v in cands if v >= value - TIE_TOL})
        return SupportValue(value, tuple(lams))
    return support(s, n)


def f_max_3d(theta: float, phi: float) -> SupportValue:
    """Support function of ``(P0, P1, P2)`` with region metadata."""
    return support_quadratic(*direction_3d(theta, phi))


# -- 2D boundary relations and the (P0, Pk) closure ---------------------------


def boundary_relation_2d(s: Slice | Sequence[int], point: Sequence[float]) -> float:
    """Residual of ``Q_n^(m/(m-n)) = exp(-(Q_m/Q_n)^(1/(m-n))) Q_m^(n/(m-n))``; zero on the coherent curve."""
    s = as_slice(s)
    if s.dim != 2:
        raise DomainError("boundary_relation_2d needs a two-dimensional slice")
    n, m = s.indices
    pn, pm = (float(x) for x in point)
    if pn <= 0 or pm <= 0:
        raise DomainError("the boundary relation needs strictly positive coordinates")
    qn, qm = factorial(n) * pn, factorial(m) * pm
    d = m - n
    return qn ** (m / d) - math.exp(-((qm / qn) ** (1.0 / d))) * qm ** (n / d)


def p0k_curve(p0, k: int):
    """``P_k`` of the coherent state with vacuum probability ``p0``: ``p0 (-ln p0)^k / k!``."""
    p0 = np.asarray(p0, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p0 * (-np.log(p0)) ** k / factorial(k)
    return np.where(p0 > 0, out, 0.0) if out.ndim else (float(out) if p0 > 0 else 0.0)


def _p0k_slope(p0: float, k: int) -> float:
    L = -math.log(p0)
    return L ** (k - 1) * (L - k) / factorial(k)


def _p0k_second(p0: float, k: int) -> float:
    L = -math.log(p0)
    return k * L ** (k - 2) * (k - 1 - L) / (factorial(k) * p0)


def inflection_p0k(k: int) -> float:
    """Inflection point ``e^(1-k)`` of the ``(P0, Pk)`` coherent curve (``k >= 2``)."""
    if k == 1:
        raise NoInflectionError("the (P0, P1) curve is convex")
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    x = math.exp(1.0 - k)
    h = 1e-3 * x
    left, right = _p0k_second(x - h, k), _p0k_second(x + h, k)
    if not (left < 0 < right or left > 0 > right):
        raise ArithmeticError(f"no curvature sign change around e^{1 - k}")
    return x


@dataclass(frozen=True)
class ConvexClosure:
    """Upper boundary of the classical set in ``(P0, Pk)``: curve up to ``p0_tangent``, then a chord to ``(1, 0)``."""

    k: int
    p0_tangent: float
    chord_slope: float

    @property
    def degenerate(self) -> bool:
        return self.p0_tangent >= 1.0

    @property
    def pk_tangent(self) -> float:
        return p0k_curve(self.p0_tangent, self.k) if self.p0_tangent < 1.0 else 0.0

    def upper(self, p0: float) -> float:
        if p0 <= self.p0_tangent:
            return p0k_curve(p0, self.k)
        return self.chord_slope * (p0 - 1.0)

    def contains(self, p0: float, pk: float, tol: float = MEMBERSHIP_TOL) -> bool:
        return 0.0 <= p0 <= 1.0 and -tol <= pk <= self.upper(p0) + tol


def convex_closure_p0k(k: int) -> ConvexClosure:
    """Convex closure of the ``(P0, Pk)`` coherent curve."""
    if k == 1:
        return ConvexClosure(1, 1.0, _p0k_slope(1.0, 1))
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")

    def g(L: float) -> float:
        t = math.exp(-L)
        return _p0k_slope(t, k) * (1.0 - t) + p0k_curve(t, k)

    lo, hi = float(k - 1), float(k - 1) + 1.0
    while g(hi) <= 0:
        hi += 2.0 * (hi - lo)
        if hi > 700:
            raise ClosureError(f"tangency not bracketed for k={k}")
    if g(lo) >= 0:
        raise ClosureError(f"tangency not bracketed for k={k}")
    L = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    t = math.exp(-L)
    return ConvexClosure(k, t, _p0k_slope(t, k))


# -- direction sampling and membership ---------------------------------------


def sample_directions(dim: int, n_dirs: int) -> np.ndarray:
    """Deterministic unit vectors: uniform angles in 2D, a Fibonacci lattice in 3D."""
    if n_dirs < 1:
        raise DomainError("n_dirs must be positive")
    if dim == 2:
        th = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
        return np.column_stack([np.cos(th), np.sin(th)])
    if dim == 3:
        i = np.arange(n_dirs) + 0.5
        z = 1.0 - 2.0 * i / n_dirs
        r = np.sqrt(1.0 - z * z)
        ang = np.pi * (3.0 - math.sqrt(5.0)) * i
        return np.column_stack([z, r * np.cos(ang), r * np.sin(ang)])
    raise DomainError(f"unsupported dimension {dim}")


@lru_cache(maxsize=16)
def _support_table(s: Slice, n_dirs: int) -> tuple[np.ndarray, np.ndarray]:
    dirs = sample_directions(s.dim, n_dirs)
    dirs.setflags(write=False)
    values = np.array([support(s, d).f_max for d in dirs])
    values.setflags(write=False)
    return dirs, values


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    max_excess: float  # max over directions of <n, x> - F_max(n)
    direction: tuple[float, ...]


def _angles_of(n: np.ndarray) -> np.ndarray:
    if n.size == 2:
        return np.array([math.atan2(n[1], n[0])])
    return np.array([math.acos(max(-1.0, min(1.0, n[0]))), math.atan2(n[2], n[1])])


def _unit_of(angles: np.ndarray) -> np.ndarray:
    if angles.size == 1:
        return direction_2d(float(angles[0]))
    return direction_3d(float(angles[0]), float(angles[1]))


def membership(
    point: Sequence[float],
    slice_indices: Slice | Sequence[int] = (0, 1, 2),
    n_dirs: int = 5000,
    refine: bool = True,
    tol: float = MEMBERSHIP_TOL,
) -> MembershipResult:
    """Whether ``point`` satisfies ``<n, point> <= F_max(n) + tol`` for all sampled directions.

    The most violated sampled directions are then polished by a local search
    over the angles, which catches points just outside flat boundary pieces
    that a finite direction set would miss.
    """
    s = as_slice(slice_indices)
    x = np.asarray(point, dtype=float)
    if x.shape != (s.dim,):
        raise DomainError(f"point has {x.size} coordinates, slice has {s.dim}")
    dirs, values = _support_table(s, n_dirs)
    excess = dirs @ x - values
    order = np.argsort(excess)[::-1]
    best = float(excess[order[0]])
    best_dir = dirs[order[0]]
    if refine and best <= tol:

        def neg_excess(angles: np.ndarray) -> float:
            n = _unit_of(angles)
            return -(float(n @ x) - support(s, n).f_max)

        for j in order[:3]:
            start = _angles_of(dirs[j])
            if s.dim == 2:
                h = math.pi / n_dirs
                res = minimize_scalar(
                    lambda t: neg_excess(np.array([t])),
                    bounds=(start[0] - 2 * h, start[0] + 2 * h),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                val, ang = -float(res.fun), np.array([res.x])
            else:
                res = minimize(
                    neg_excess,
                    start,
                    method="Nelder-Mead",
                    options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 400},
                )
                val, ang = -float(res.fun), res.x
            if val > best:
                best, best_dir = val, _unit_of(ang)
            if best > tol:
                break
    return MembershipResult(bool(best <= tol), best, tuple(float(v) for v in best_dir))


# -- hulls of simple generating sets -----------------------------------------


def polygon_support(points: Sequence[Sequence[float]], n: Sequence[float], tol: float = TIE_TOL):
    """``F_max`` of a finite point set (or of the segments they span) and the maximizing points."""
    pts = np.asarray(points, dtype=float)
    vals = pts @ np.asarray(n, dtype=float)
    best = float(vals.max())
    return best, [tuple(p) for p in pts[vals >= best - tol]]


def reconstruct_hull_2d(
    support_fn: Callable[[np.ndarray], tuple[float, list]], n_dirs: int = 720
) -> list[tuple[float, ...]]:
    """Vertices of a planar convex hull, in counter-clockwise order, from its support function.

    ``support_fn(n)`` returns ``(F_max, maximizing points)``. Every maximizer of
    some sampled direction lies on the hull boundary; keeping the extreme ones
    yields the vertices.
    """
    seen: list[tuple[float, ...]] = []
    for n in sample_directions(2, n_dirs):
        _, pts = support_fn(n)
        for p in pts:
            p = tuple(round(float(c), 12) for c in p)
            if p not in seen:
                seen.append(p)
    pts = np.array(seen)
    centre = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0])
    ordered = pts[np.argsort(ang)]
    # drop points interior to an edge
    keep = []
    m = len(ordered)
    for i in range(m):
        a, b, c = ordered[i - 1], ordered[i], ordered[(i + 1) % m]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > 1e-12:
            keep.append(tuple(float(v) for v in b))
    return keep


# -- boundary samples and direction landscape --------------------------------


@dataclass(frozen=True)
class BoundarySample:
    param: float
    t: float
    coords: tuple[float, ...]
    branch: str


def k1_boundary_direction(theta: float) -> tuple[float, float]:
    """Direction ``(theta, phi)`` in ``[pi/2, pi]`` whose tangent plane holds the origin and one coherent state.

    Returns ``(phi, lambda)`` with ``lambda`` the coherent intensity touched.
    """
    if not 0.5 * math.pi <= theta <= math.pi:
        raise DomainError("theta must lie in [pi/2, pi]")
    phi = 2.0 * math.pi - math.asin(1.0 / math.tan(0.5 * theta))
    lam = math.sqrt(-math.cos(theta)) / math.cos(0.5 * theta)
    return phi, lam


def boundary_samples(s: Slice | Sequence[int], samples: int = 50, lam_max: float = 10.0) -> list[BoundarySample]:
    """Points on the boundary of the classical set, labelled by branch.

    ``(P0, P1, P2)``: the coherent curve plus the two ruled sheets (segments from
    each coherent point to the origin, ``k1``, and to the vacuum, ``kinf``).
    ``(P0, Pk)``: the curve up to the tangency point and the closing chord.
    """
    s = as_slice(s)
    if samples < 2:
        raise DomainError("need at least two samples")
    lams = np.linspace(0.0, lam_max, samples)
    ts = np.linspace(0.0, 1.0, samples)
    out: list[BoundarySample] = []
    if s.indices == (0, 1, 2):
        vac = np.array([1.0, 0.0, 0.0])
        for lam in lams:
            c = coherent_curve(s, lam)
            out.append(BoundarySample(float(lam), 0.0, tuple(c), "coherent"))
        for branch, anchor in (("k1", np.zeros(3)), ("kinf", vac)):
            for lam in lams:
                c = coherent_curve(s, lam)
                for t in ts[1:-1]:
                    out.append(BoundarySample(float(lam), float(t), tuple((1 - t) * c + t * anchor), branch))
        return out
    if s.dim == 2 and s.indices[0] == 0:
        k = s.indices[1]
        cl = convex_closure_p0k(k)
        lam_t = -math.log(cl.p0_tangent) if cl.p0_tangent < 1.0 else 0.0
        for lam in np.linspace(lam_t, lam_max, samples):
            out.append(BoundarySample(float(lam), 0.0, tuple(coherent_curve(s, lam)), "coherent"))
        if not cl.degenerate:
            start = np.array([cl.p0_tangent, cl.pk_tangent])
            for t in ts:
                p = (1 - t) * start + t * np.array([1.0, 0.0])
                out.append(BoundarySample(lam_t, float(t), tuple(p), "chord"))
        return out
    raise DomainError(f"boundary sampling is not available for slice ({s})")


def landscape(n_theta: int = 181, n_phi: int = 361) -> list[tuple[float, float, int]]:
    """Region id (see :class:`Region`) on a ``(theta, phi)`` grid over the sphere."""
    rows = []
    for theta in np.linspace(0.0, math.pi, n_theta):
        for phi in np.linspace(0.0, 2.0 * math.pi, n_phi):
            rows.append((float(theta), float(phi), int(classify(*direction_3d(theta, phi)))))
    return rows
