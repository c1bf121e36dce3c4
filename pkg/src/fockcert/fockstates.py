"""Fock-state probability vectors and the state families that generate them.

Every generator returns a :class:`FockDistribution` holding ``P_0 .. P_N``.
When ``n_max`` is omitted the cutoff is chosen so that the neglected tail mass
is below ``1e-12``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Any, ClassVar, Callable, Iterable, Sequence

import numpy as np
from scipy.stats import poisson

from ._jsonio import dumps
from ._numerics import DimensionError, DomainError, factorial, factorial_table

TAIL_EPS = 1e-15  # below this the tail counts as absent
AUTO_TAIL = 1e-12  # target tail mass for automatically chosen cutoffs
_MAX_AUTO_CUTOFF = 4096


class TruncationError(RuntimeError):
    """The truncated Fock basis is too small to represent the state accurately."""


@dataclass(frozen=True, eq=False)
class FockDistribution:
    """Probabilities ``P_0 .. P_N`` of a single bosonic mode.

    ``truncated`` is True when probability mass beyond ``N`` is unknown or
    non-negligible.
    """

    probs: np.ndarray
    truncated: bool = True
    family: str | None = None
    params: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise DimensionError("a distribution needs at least P_0")
        if not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite")
        if np.any(p < 0):
            raise DomainError(f"negative probability at index {int(np.argmin(p))}")
        total = math.fsum(p)
        if total > 1 + 1e-12:
            raise DomainError(f"probabilities sum to {total!r} > 1")
        if not self.truncated and abs(total - 1) > 1e-9:
            raise DomainError(f"untruncated distribution sums to {total!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, k):
        return self.probs[k]

    @property
    def tail_mass(self) -> float:
        """Probability not accounted for by ``P_0 .. P_N`` (never negative)."""
        return max(0.0, 1.0 - math.fsum(self.probs))

    @property
    def q(self) -> "FactorialWeights":
        return FactorialWeights.from_distribution(self)

    def prefix(self, n: int) -> "FockDistribution":
        """The sub-vector ``P_0 .. P_n``."""
        if n < 0 or n > self.n_max:
            raise DimensionError(f"cannot take P_0..P_{n} of a vector ending at P_{self.n_max}")
        dropped = math.fsum(self.probs[n + 1 :])
        return FockDistribution(
            self.probs[: n + 1],
            truncated=self.truncated or dropped > 0,
            family=self.family,
            params=self.params,
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"probs": [float(x) for x in self.probs], "truncated": bool(self.truncated)}
        if self.family is not None:
            out["family"] = self.family
        if self.params is not None:
            out["params"] = dict(self.params)
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict(), digits=17)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FockDistribution":
        if "probs" not in data:
            raise DomainError("distribution JSON needs a 'probs' array")
        return cls(
            np.asarray(data["probs"], dtype=float),
            truncated=bool(data.get("truncated", True)),
            family=data.get("family"),
            params=data.get("params"),
        )

    @classmethod
    def from_json(cls, text: str) -> "FockDistribution":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class FactorialWeights:
    """``Q_k = k! P_k``, the coordinates in which the classical bounds are products."""

    q: np.ndarray

    @classmethod
    def from_distribution(cls, dist: FockDistribution) -> "FactorialWeights":
        q = dist.probs * factorial_table(dist.n_max)
        q[0] = dist.probs[0]
        q.setflags(write=False)
        return cls(q)

    def __len__(self) -> int:
        return self.q.size

    def __getitem__(self, k):
        return self.q[k]


# -- helpers -----------------------------------------------------------------


def _check_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be a finite number >= 0, got {value!r}")
    return value


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _check_cutoff(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 0:
        raise DimensionError(f"n_max must be a non-negative integer, got {n_max!r}")
    return int(n_max)


def _numeric_tail(probs_fn: Callable[[int], np.ndarray]) -> Callable[[int], float]:
    return lambda n: max(0.0, 1.0 - math.fsum(probs_fn(n)))


def _auto_cutoff(tail_fn: Callable[[int], float], guess: int) -> int:
    hi = max(guess, 4)
    while tail_fn(hi) >= AUTO_TAIL:
        hi *= 2
        if hi > _MAX_AUTO_CUTOFF:
            raise TruncationError("could not reach tail mass 1e-12 with an automatic cutoff")
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_fn(mid) < AUTO_TAIL:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _guess(mu: float, extra: float = 0.0) -> int:
    return int(mu + 12.0 * math.sqrt(mu + 1.0) + extra + 10)


def _build(
    probs_fn: Callable[[int], np.ndarray],
    n_max: int | None,
    family: str,
    params: dict[str, Any],
    tail_fn: Callable[[int], float] | None = None,
    guess: int = 16,
) -> FockDistribution:
    if tail_fn is None:
        tail_fn = _numeric_tail(probs_fn)
    n = _auto_cutoff(tail_fn, guess) if n_max is None else _check_cutoff(n_max)
    probs = np.clip(probs_fn(n), 0.0, None)
    tail = tail_fn(n)
    return FockDistribution(probs, truncated=tail >= TAIL_EPS, family=family, params=params)


def _log_ratio_factorials(a: int, b: int) -> float:
    """ln(a!/b!) for a >= b, from exact integers."""
    return math.log(math.factorial(a) // math.factorial(b))


def _poisson_term(mu: float, k: int) -> float:
    if k <= 170 and k * math.log(mu) < 700:
        return math.exp(-mu) * mu**k / factorial(k)
    return math.exp(-mu + k * math.log(mu) - math.log(math.factorial(k)))


# -- generators --------------------------------------------------------------


def coherent_dist(mu: float, n_max: int | None = None) -> FockDistribution:
    """Poisson statistics ``e^{-mu} mu^k / k!`` of a coherent state."""
    mu = _check_nonneg("mu", mu)

    def probs(n: int) -> np.ndarray:
        if mu == 0:
            return (np.arange(n + 1) == 0).astype(float)
        return np.array([_poisson_term(mu, k) for k in range(n + 1)])

    def tail(n: int) -> float:
        return 0.0 if mu == 0 else float(poisson.sf(n, mu))

    return _build(probs, n_max, "coherent", {"mu": mu}, tail, _guess(mu))


def fock_dist(n: int, n_max: int | None = None) -> FockDistribution:
    """Point mass on the Fock state ``|n>``."""
    if int(n) != n or n < 0:
        raise DomainError(f"Fock index must be a non-negative integer, got {n!r}")
    n = int(n)
    n_max = n if n_max is None else _check_cutoff(n_max)
    if n > n_max:
        raise DimensionError(f"|{n}> does not fit below n_max={n_max}")
    probs = np.zeros(n_max + 1)
    probs[n] = 1.0
    return FockDistribution(probs, truncated=False, family="fock", params={"n": n})


def thermal_dist(mu: float, n_max: int | None = None) -> FockDistribution:
    """Geometric statistics ``mu^k / (1+mu)^{k+1}``."""
    mu = _check_nonneg("mu", mu)
    x = mu / (1 + mu)

    def probs(n: int) -> np.ndarray:
        k = np.arange(n + 1)
        return x**k / (1 + mu)

    def tail(n: int) -> float:
        return x ** (n + 1)

    return _build(probs, n_max, "thermal", {"mu": mu}, tail, int(40 * (mu + 1)))


def displacement_element(j: int, k: int, alpha: complex) -> complex:
    """Matrix element ``<j|D(alpha)|k>`` of the displacement operator.

    Uses the finite sum for ``j >= k`` and ``<j|D(a)|k> = conj(<k|D(-a)|j>)``
    otherwise, since the sum needs ``j - k + i >= 0``.
    """
    if j < k:
        return displacement_element(k, j, -alpha).conjugate()
    alpha = complex(alpha)
    mu = abs(alpha) ** 2
    lag = math.fsum((-mu) ** i / factorial(i) * math.comb(j, k - i) for i in range(k + 1))
    if j == k:
        return complex(math.exp(-mu / 2) * lag)
    if alpha == 0:
        return 0j
    log_mag = -mu / 2 + (j - k) * math.log(abs(alpha)) - 0.5 * _log_ratio_factorials(j, k)
    phase = (alpha / abs(alpha)) ** (j - k)
    return cmath.exp(complex(log_mag, 0)) * phase * lag


def noisy_fock_dist(k: int, mu: float, n_max: int | None = None) -> FockDistribution:
    """Phase-averaged displaced Fock state ``D(alpha)|k>`` with ``|alpha|^2 = mu``."""
    if int(k) != k or k < 0:
        raise DomainError(f"Fock index must be a non-negative integer, got {k!r}")
    k = int(k)
    mu = _check_nonneg("mu", mu)
    if mu == 0:
        dist = fock_dist(k, k if n_max is None else n_max)
        return FockDistribution(dist.probs, truncated=False, family="noisy-fock", params={"k": k, "mu": mu})

    def element_sq(j: int) -> float:
        lo, hi = min(j, k), max(j, k)
        lag = math.fsum((-mu) ** i / factorial(i) * math.comb(hi, lo - i) for i in range(lo + 1))
        if lag == 0.0:
            return 0.0
        log_p = -mu + (hi - lo) * math.log(mu) - _log_ratio_factorials(hi, lo)
        return math.exp(log_p) * lag * lag

    @lru_cache(maxsize=None)
    def probs_tuple(n: int) -> tuple[float, ...]:
        return tuple(element_sq(j) for j in range(n + 1))

    def probs(n: int) -> np.ndarray:
        return np.array(probs_tuple(n))

    return _build(probs, n_max, "noisy-fock", {"k": k, "mu": mu}, guess=_guess(mu, k))


def _boson_added_norm(mu: float, ell: int) -> float:
    # ell! L_ell(-mu) = sum_i C(ell, i) ell!/i! mu^i
    return math.fsum(math.comb(ell, i) * factorial(ell) / factorial(i) * mu**i for i in range(ell + 1))


def _boson_added_probs(mu: float, ell: int, n: int) -> np.ndarray:
    norm = _boson_added_norm(mu, ell)
    out = np.zeros(n + 1)
    for k in range(ell, n + 1):
        # e^{-mu} mu^{k-ell} k! / ((k-ell)!^2 ell! L_ell(-mu))
        if mu == 0:
            out[k] = 1.0 if k == ell else 0.0
            continue
        log_p = -mu + (k - ell) * math.log(mu) + _log_ratio_factorials(k, k - ell) - math.lgamma(k - ell + 1)
        out[k] = math.exp(log_p) / norm
    return out


def boson_added_coherent_dist(mu: float, ell: int = 1, n_max: int | None = None) -> FockDistribution:
    """Statistics of ``a^dag^ell |alpha>`` (equivalently boson-added Poissonian noise)."""
    mu = _check_nonneg("mu", mu)
    if int(ell) != ell or ell < 1:
        raise DomainError(f"number of added bosons must be an integer >= 1, got {ell!r}")
    ell = int(ell)
    return _build(
        lambda n: _boson_added_probs(mu, ell, n),
        n_max,
        "boson-added-coherent",
        {"mu": mu, "ell": ell},
        guess=_guess(mu, ell),
    )


def prob_boson_added_coherent_dist(mu: float, p: float, n_max: int | None = None) -> FockDistribution:
    """``p a^dag rho_mu a / (1+mu) + (1-p) rho_mu`` for Poissonian ``rho_mu``."""
    mu = _check_nonneg("mu", mu)
    p = _check_prob("p", p)

    def probs(n: int) -> np.ndarray:
        added = _boson_added_probs(mu, 1, n)
        pois = np.array([_poisson_term(mu, k) if mu > 0 else float(k == 0) for k in range(n + 1)])
        return p * added + (1 - p) * pois

    return _build(probs, n_max, "prob-boson-added-coherent", {"mu": mu, "p": p}, guess=_guess(mu, 1))


def _added_thermal_probs(mu: float, n: int) -> np.ndarray:
    k = np.arange(n + 1)
    if mu == 0:
        return (k == 1).astype(float)
    return k * mu ** np.maximum(k - 1, 0) / (1 + mu) ** (k + 1)


def _added_thermal_tail(mu: float, n: int) -> float:
    x = mu / (1 + mu)
    return (n + 1) * x**n - n * x ** (n + 1)


def boson_added_thermal_dist(mu: float, n_max: int | None = None) -> FockDistribution:
    """Statistics of ``a^dag rho_th a`` normalized: ``k mu^{k-1} / (1+mu)^{k+1}``."""
    mu = _check_nonneg("mu", mu)
    return _build(
        lambda n: _added_thermal_probs(mu, n),
        n_max,
        "boson-added-thermal",
        {"mu": mu},
        lambda n: _added_thermal_tail(mu, n),
        int(60 * (mu + 1)),
    )


def mixed_boson_added_thermal_dist(mu: float, p: float, n_max: int | None = None) -> FockDistribution:
    """``[(1-p) k/mu + p] mu^k/(1+mu)^{k+1}``.

    Note the convention: weight ``1 - p`` sits on the boson-added component and
    ``p`` on the plain thermal one, so ``p = 1`` is the thermal state.
    """
    mu = _check_nonneg("mu", mu)
    p = _check_prob("p", p)
    x = mu / (1 + mu)

    def probs(n: int) -> np.ndarray:
        k = np.arange(n + 1)
        return (1 - p) * _added_thermal_probs(mu, n) + p * x**k / (1 + mu)

    def tail(n: int) -> float:
        return (1 - p) * _added_thermal_tail(mu, n) + p * x ** (n + 1)

    return _build(probs, n_max, "mixed-boson-added-thermal", {"mu": mu, "p": p}, tail, int(60 * (mu + 1)))


def thermally_averaged_fock1_dist(mu: float, n_max: int | None = None) -> FockDistribution:
    """Thermal average of the noisy single-boson statistics over the displacement intensity."""
    mu = _check_nonneg("mu", mu)

    def probs(n: int) -> np.ndarray:
        k = np.arange(n + 1)
        if mu == 0:
            return (k == 1).astype(float)
        # (mu/(1+mu))^k (k + mu^2) / (mu (1+mu)^2), with the 1/mu absorbed for k >= 1
        out = mu ** np.maximum(k - 1, 0) * (k + mu**2) / (1 + mu) ** (k + 2)
        out[0] = mu / (1 + mu) ** 2
        return out

    return _build(probs, n_max, "thermally-averaged-fock1", {"mu": mu}, guess=int(60 * (mu + 1)))


def _squeezed_thermal_probs(mu: float, xi: float, n: int) -> np.ndarray:
    """Coefficients of the generating function ``sum_k P_k z^k = (alpha + beta z + gamma z^2)^(-1/2)``.

    For a Gaussian state the generating function is the overlap with
    ``z^(a^dag a)``, itself proportional to a thermal state; with
    ``s = mu + 1/2`` and ``c = cosh(2 xi)`` the quadratic has
    ``alpha = s^2 + 1/4 + s c``, ``beta = 1/2 - 2 s^2``, ``gamma = s^2 + 1/4 - s c``.
    Differentiating ``q G^2 = 1`` gives a three-term recurrence whose
    dominant solution is the wanted one, so the forward pass is stable.
    """
    s = mu + 0.5
    c = math.cosh(2.0 * xi)
    alpha = s * s + 0.25 + s * c
    beta = 0.5 - 2.0 * s * s
    gamma = s * s + 0.25 - s * c
    out = np.zeros(n + 1)
    out[0] = 1.0 / math.sqrt(alpha)
    if n >= 1:
        out[1] = -beta * out[0] / (2.0 * alpha)
    for k in range(1, n):
        out[k + 1] = -(beta * (2 * k + 1) * out[k] + 2.0 * gamma * k * out[k - 1]) / (2.0 * alpha * (k + 1))
    return out


def squeezed_thermal_dist(mu: float, xi: float, n_max: int | None = None) -> FockDistribution:
    """Diagonal of ``S(xi) rho_th S(xi)^dag``; only ``|xi|`` matters."""
    mu = _check_nonneg("mu", mu)
    xi = float(xi)
    if not math.isfinite(xi):
        raise DomainError("xi must be finite")
    if xi == 0:
        dist = thermal_dist(mu, n_max)
        return FockDistribution(dist.probs, dist.truncated, "squeezed-thermal", {"mu": mu, "xi": xi})
    mean = (mu + 0.5) * math.cosh(2.0 * xi) - 0.5
    return _build(
        lambda n: _squeezed_thermal_probs(mu, xi, n),
        n_max,
        "squeezed-thermal",
        {"mu": mu, "xi": xi},
        guess=int(40 * (mean + 1)),
    )


# -- tagged families -----------------------------------------------------------


@dataclass(frozen=True)
class StateFamily:
    """Base class of the parameterized state families."""

    name: ClassVar[str] = ""

    def distribution(self, n_max: int | None = None) -> FockDistribution:  # pragma: no cover
        raise NotImplementedError

    def params(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class Coherent(StateFamily):
    mu: float
    name: ClassVar[str] = "coherent"

    def distribution(self, n_max=None):
        return coherent_dist(self.mu, n_max)


@dataclass(frozen=True)
class Fock(StateFamily):
    n: int
    name: ClassVar[str] = "fock"

    def distribution(self, n_max=None):
        return fock_dist(self.n, n_max)


@dataclass(frozen=True)
class Thermal(StateFamily):
    mu: float
    name: ClassVar[str] = "thermal"

    def distribution(self, n_max=None):
        return thermal_dist(self.mu, n_max)


@dataclass(frozen=True)
class NoisyFock(StateFamily):
    k: int
    mu: float
    name: ClassVar[str] = "noisy-fock"

    def distribution(self, n_max=None):
        return noisy_fock_dist(self.k, self.mu, n_max)


@dataclass(frozen=True)
class BosonAddedCoherent(StateFamily):
    mu: float
    ell: int = 1
    name: ClassVar[str] = "boson-added-coherent"

    def distribution(self, n_max=None):
        return boson_added_coherent_dist(self.mu, self.ell, n_max)


@dataclass(frozen=True)
class ProbBosonAddedCoherent(StateFamily):
    mu: float
    p: float
    name: ClassVar[str] = "prob-boson-added-coherent"

    def distribution(self, n_max=None):
        return prob_boson_added_coherent_dist(self.mu, self.p, n_max)


@dataclass(frozen=True)
class BosonAddedThermal(StateFamily):
    mu: float
    name: ClassVar[str] = "boson-added-thermal"

    def distribution(self, n_max=None):
        return boson_added_thermal_dist(self.mu, n_max)


@dataclass(frozen=True)
class MixedBosonAddedThermal(StateFamily):
    mu: float
    p: float
    name: ClassVar[str] = "mixed-boson-added-thermal"

    def distribution(self, n_max=None):
        return mixed_boson_added_thermal_dist(self.mu, self.p, n_max)


@dataclass(frozen=True)
class ThermallyAveragedFock1(StateFamily):
    mu: float
    name: ClassVar[str] = "thermally-averaged-fock1"

    def distribution(self, n_max=None):
        return thermally_averaged_fock1_dist(self.mu, n_max)


@dataclass(frozen=True)
class SqueezedThermal(StateFamily):
    mu: float
    xi: float
    name: ClassVar[str] = "squeezed-thermal"

    def distribution(self, n_max=None):
        return squeezed_thermal_dist(self.mu, self.xi, n_max)


@dataclass(frozen=True)
class Mixture(StateFamily):
    components: tuple[tuple[float, StateFamily], ...] = field(default_factory=tuple)
    name: ClassVar[str] = "mixture"

    def __post_init__(self) -> None:
        comps = tuple((float(w), fam) for w, fam in self.components)
        if not comps:
            raise DomainError("a mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise DomainError("mixture weights must be non-negative")
        if abs(math.fsum(w for w, _ in comps) - 1) > 1e-12:
            raise DomainError("mixture weights must sum to 1")
        object.__setattr__(self, "components", comps)

    def distribution(self, n_max=None):
        if n_max is None:
            n_max = max(fam.distribution().n_max for _, fam in self.components)
        parts = [(w, fam.distribution(n_max)) for w, fam in self.components]
        probs = sum(w * d.probs for w, d in parts)
        truncated = any(d.truncated and w > 0 for w, d in parts)
        return FockDistribution(
            np.clip(probs, 0.0, None),
            truncated=truncated,
            family="mixture",
            params={"components": [{"weight": w, "family": fam.name, **fam.params()} for w, fam in self.components]},
        )

    def params(self) -> dict[str, Any]:
        return {"components": [{"weight": w, "family": fam.name, **fam.params()} for w, fam in self.components]}


FAMILIES: dict[str, type[StateFamily]] = {
    cls.name: cls
    for cls in (
        Coherent,
        Fock,
        Thermal,
        NoisyFock,
        BosonAddedCoherent,
        ProbBosonAddedCoherent,
        BosonAddedThermal,
        MixedBosonAddedThermal,
        ThermallyAveragedFock1,
        SqueezedThermal,
    )
}
# the probabilistically boson-added coherent family is also the dephased
# "boson-added Poissonian noise" mixture used for the Wigner comparison
FAMILIES["mixed-boson-added-poisson"] = ProbBosonAddedCoherent

_INT_PARAMS = {"n", "k", "ell"}


def make_family(name: str, **params: Any) -> StateFamily:
    """Build a family by its name, e.g. ``make_family("noisy-fock", k=1, mu=0.5)``."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown state family {name!r}; choose from {sorted(FAMILIES)}") from None
    wanted = [f.name for f in fields(cls)]
    kwargs = {}
    for key in wanted:
        if key in params and params[key] is not None:
            val = params[key]
            kwargs[key] = int(val) if key in _INT_PARAMS else float(val)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise DomainError(f"family {name!r} needs parameters {wanted}: {exc}") from None


def mix(components: Iterable[tuple[float, StateFamily]]) -> Mixture:
    return Mixture(tuple(components))


def mixture_of_distributions(
    weights: Sequence[float], dists: Sequence[FockDistribution]
) -> FockDistribution:
    """Entrywise convex combination of distributions sharing the same cutoff."""
    if len({d.n_max for d in dists}) != 1:
        raise DimensionError("mixed distributions must share n_max")
    probs = sum(float(w) * d.probs for w, d in zip(weights, dists))
    return FockDistribution(np.clip(probs, 0.0, None), truncated=any(d.truncated for d in dists))
