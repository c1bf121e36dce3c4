"""Wigner functions and regularized P-functions of single-mode states.

Phase-space points are ``z = x + i p``; with this scaling a coherent state
``|alpha>`` is a Gaussian centred at ``sqrt(2) alpha`` and every Wigner
function is bounded by ``1/pi`` in magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ._numerics import DomainError
from .fockstates import FockDistribution, StateFamily

NEGATIVITY_TOL = 1e-10
TAIL_WARN = 1e-12
P_FUNCTION_NBAR_FLOOR = 1e-3
DEFAULT_RADIUS = 6.0
DEFAULT_GRID = 201
DEFAULT_RADIAL = 2001


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.p)):
            raise DomainError("phase-space coordinates must be finite")

    @property
    def z(self) -> complex:
        return complex(self.x, self.p)


def laguerre(k: int, x):
    """``L_k(x)`` by the three-term recurrence (vectorized over ``x``)."""
    if k < 0:
        raise DomainError(f"Laguerre degree must be non-negative, got {k}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 - x) * cur - j * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def laguerre_table(k_max: int, x) -> np.ndarray:
    """Array of shape ``(k_max + 1,) + x.shape`` holding ``L_0(x) .. L_k_max(x)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((k_max + 1,) + x.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = 1.0 - x
    for j in range(1, k_max):
        out[j + 1] = ((2 * j + 1 - x) * out[j] - j * out[j - 1]) / (j + 1)
    return out


def _abs2(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return z.real**2 + z.imag**2


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def wigner_fock(k: int, z):
    """Wigner function of ``|k>``."""
    r2 = _abs2(z)
    sign = -1.0 if k % 2 else 1.0
    return _scalar(sign / math.pi * np.exp(-r2) * laguerre(k, 2.0 * r2))


def wigner_coherent(alpha: complex, z):
    return _scalar(np.exp(-_abs2(np.asarray(z) - math.sqrt(2.0) * alpha)) / math.pi)


def wigner_thermal(mu: float, z):
    """Gaussian Wigner function of a thermal state with mean ``mu``."""
    s = 1.0 + 2.0 * mu
    return _scalar(np.exp(-_abs2(z) / s) / (math.pi * s))


def wigner_boson_added_coherent(alpha: complex, z):
    """Wigner function of ``a^dagger |alpha>`` (normalized)."""
    z = np.asarray(z, dtype=complex)
    num = 2.0 * _abs2(z - alpha / math.sqrt(2.0)) - 1.0
    return _scalar(num * np.exp(-_abs2(z - math.sqrt(2.0) * alpha)) / (math.pi * (1.0 + abs(alpha) ** 2)))


@dataclass(frozen=True)
class WignerValue:
    value: float | np.ndarray
    error_bound: float  # |neglected tail| / pi
    warning: str | None = None

    @property
    def accurate(self) -> bool:
        return self.warning is None


def wigner_diagonal(dist: FockDistribution, z) -> WignerValue:
    """``sum_k P_k W_k(z)`` for a state diagonal in the Fock basis.

    Every ``|W_k|`` is at most ``1/pi``, so the unrepresented mass bounds the
    truncation error by ``tail_mass / pi``.
    """
    r2 = _abs2(z)
    lag = laguerre_table(dist.n_max, 2.0 * r2)
    signs = np.where(np.arange(dist.n_max + 1) % 2, -1.0, 1.0) * dist.probs
    value = np.exp(-r2) / math.pi * np.tensordot(signs, lag, axes=1)
    tail = dist.tail_mass
    warning = None
    if tail >= TAIL_WARN:
        warning = f"tail mass {tail:.2e} beyond P_{dist.n_max} limits the accuracy"
    return WignerValue(_scalar(value), tail / math.pi, warning)


# -- states and minima --------------------------------------------------------


@dataclass(frozen=True)
class WignerState:
    """A callable Wigner function and whether it depends on ``|z|`` only."""

    function: Callable[[np.ndarray], np.ndarray]
    symmetric: bool
    label: str = ""

    def __call__(self, z):
        return self.function(z)


def diagonal_state(dist: FockDistribution, label: str = "") -> WignerState:
    return WignerState(lambda z: wigner_diagonal(dist, z).value, True, label or (dist.family or "diagonal"))


def coherent_state(alpha: complex) -> WignerState:
    return WignerState(lambda z: wigner_coherent(alpha, z), alpha == 0, "coherent")


def boson_added_coherent_state(alpha: complex) -> WignerState:
    return WignerState(lambda z: wigner_boson_added_coherent(alpha, z), alpha == 0, "boson-added-coherent")


def as_wigner_state(state) -> WignerState:
    if isinstance(state, WignerState):
        return state
    if isinstance(state, FockDistribution):
        return diagonal_state(state)
    if isinstance(state, StateFamily):
        # every built-in family is phase-averaged, hence diagonal
        return diagonal_state(state.distribution(), state.name)
    raise DomainError(f"cannot build a Wigner function from {type(state).__name__}")


@dataclass(frozen=True)
class NegativityReport:
    min_value: float
    argmin: PhasePoint
    negative: bool

    def to_dict(self) -> dict:
        return {
            "min_value": self.min_value,
            "argmin": {"x": self.argmin.x, "p": self.argmin.p},
            "negative": self.negative,
        }


def radial_profile(state, radius: float = DEFAULT_RADIUS, n: int = DEFAULT_RADIAL):
    st = as_wigner_state(state)
    r = np.linspace(0.0, radius, n)
    return r, np.asarray(st(r.astype(complex)), dtype=float)


def wigner_grid(state, radius: float = DEFAULT_RADIUS, grid_n: int = DEFAULT_GRID):
    st = as_wigner_state(state)
    xs = np.linspace(-radius, radius, grid_n)
    X, P = np.meshgrid(xs, xs, indexing="xy")
    return xs, xs, np.asarray(st(X + 1j * P), dtype=float)


def min_wigner(
    state,
    radius: float = DEFAULT_RADIUS,
    grid_n: int = DEFAULT_GRID,
    radial_n: int = DEFAULT_RADIAL,
    tol: float = NEGATIVITY_TOL,
) -> NegativityReport:
    """Smallest Wigner value found by a grid scan followed by local refinement."""
    if radius <= 0 or grid_n < 3:
        raise DomainError("min_wigner needs radius > 0 and grid_n >= 3")
    st = as_wigner_state(state)

    def w(x: float, p: float) -> float:
        return float(st(np.array([complex(x, p)]))[0])

    if st.symmetric:
        r, vals = radial_profile(st, radius, radial_n)
        j = int(np.argmin(vals))
        best, arg = float(vals[j]), (float(r[j]), 0.0)
        h = r[1] - r[0]
        lo, hi = max(0.0, r[j] - h), min(radius, r[j] + h)
        res = minimize_scalar(lambda t: w(t, 0.0), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.fun < best:
            best, arg = float(res.fun), (float(res.x), 0.0)
    else:
        xs, ps, W = wigner_grid(st, radius, grid_n)
        i, j = np.unravel_index(int(np.argmin(W)), W.shape)
        best, arg = float(W[i, j]), (float(xs[j]), float(ps[i]))
        res = minimize(lambda v: w(v[0], v[1]), np.array(arg), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-15})
        if res.fun < best and np.all(np.abs(res.x) <= radius):
            best, arg = float(res.fun), (float(res.x[0]), float(res.x[1]))
    return NegativityReport(best, PhasePoint(*arg), bool(best < -tol))


def wigner_zero_mixed_boson_added_poisson(mu: float, p: float) -> float:
    """``W(0)`` of ``p a^dagger rho_mu a / (1 + mu) + (1 - p) rho_mu`` for dephased coherent ``rho_mu``."""
    return math.exp(-2.0 * mu) * (mu + 1.0 - 2.0 * p) / (math.pi * (mu + 1.0))


# -- regularized P-functions ----------------------------------------------------


def _check_nbar(nbar: float) -> float:
    nbar = float(nbar)
    if not nbar > 0:
        raise DomainError(f"the regularized P-function needs nbar > 0, got {nbar}")
    return nbar


def p_function_thermal(nbar: float, alpha):
    """``(1/nbar) exp(-|alpha|^2 / nbar)``, normalized to integrate to ``pi``."""
    nbar = _check_nbar(nbar)
    return _scalar(np.exp(-_abs2(alpha) / nbar) / nbar)


def p_function_boson_added_thermal(nbar: float, alpha):
    """P-function of a single-boson-added thermal state, same normalization as :func:`p_function_thermal`.

    Negative exactly for ``|alpha|^2 < nbar / (1 + nbar)``.
    """
    nbar = _check_nbar(nbar)
    a2 = _abs2(alpha)
    return _scalar((a2 * (1.0 + nbar) - nbar) * np.exp(-a2 / nbar) / nbar**3)


@dataclass(frozen=True)
class PFunctionValue:
    value: float
    error: float  # change between the last two quadrature refinements
    warning: str | None = None


def p_function_phase_averaged(
    nbar: float,
    mu: float,
    p: float,
    alpha: complex,
    tol: float = 1e-9,
    min_level: int = 3,
    max_level: int = 22,
) -> PFunctionValue:
    """Phase average over ``phi`` of ``p P_added(alpha - sqrt(mu) e^{i phi}) + (1 - p) P_thermal(...)``.

    The trapezoid rule on ``2^m`` nodes is refined until two successive levels
    agree within ``tol`` (relative to the value when it exceeds one).
    """
    nbar = _check_nbar(nbar)
    if mu < 0 or not 0 <= p <= 1:
        raise DomainError("need mu >= 0 and 0 <= p <= 1")
    warning = None
    if nbar < P_FUNCTION_NBAR_FLOOR:
        warning = f"nbar = {nbar:g} is below the numerical floor {P_FUNCTION_NBAR_FLOOR:g}"
    shift = math.sqrt(mu)

    def kernel(pts: np.ndarray) -> np.ndarray:
        return p * p_function_boson_added_thermal(nbar, pts) + (1 - p) * p_function_thermal(nbar, pts)

    if mu == 0:
        return PFunctionValue(float(kernel(np.array([alpha]))[0]), 0.0, warning)

    prev = None
    for m in range(min_level, max_level + 1):
        phi = 2.0 * np.pi * np.arange(2**m) / 2**m
        val = float(np.mean(kernel(alpha - shift * np.exp(1j * phi))))
        if prev is not None:
            err = abs(val - prev)
            if err < tol * max(1.0, abs(val)):
                return PFunctionValue(val, err, warning)
        prev = val
    return PFunctionValue(val, err, warning or "phase quadrature did not converge")
