import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import eval_laguerre

from fockcert import fockstates as fs
from fockcert import phasespace as ps
from fockcert._numerics import DomainError


def laguerre_poly(k, x):
    return sum(math.comb(k, i) * (-x) ** i / math.factorial(i) for i in range(k + 1))


def grid_integral(fn, radius=8.0, n=801):
    xs = np.linspace(-radius, radius, n)
    X, P = np.meshgrid(xs, xs)
    W = np.asarray(fn(X + 1j * P), dtype=float)
    edge = max(np.abs(W[0]).max(), np.abs(W[-1]).max(), np.abs(W[:, 0]).max(), np.abs(W[:, -1]).max())
    assert edge < 1e-10
    return integrate.trapezoid(integrate.trapezoid(W, xs, axis=1), xs)


def test_laguerre_recurrence():
    for k in range(8):
        for x in (0.0, 0.3, 2.0, 7.5):
            assert ps.laguerre(k, x) == pytest.approx(laguerre_poly(k, x), abs=1e-12)
    xs = np.linspace(0, 30, 61)
    np.testing.assert_allclose(ps.laguerre(60, xs), eval_laguerre(60, xs), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(ps.laguerre_table(6, xs)[6], ps.laguerre(6, xs))
    with pytest.raises(DomainError):
        ps.laguerre(-1, 0.0)


def test_wigner_fock_values():
    assert ps.wigner_fock(0, 0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert ps.wigner_fock(1, 0) == pytest.approx(-1 / math.pi, rel=1e-15)
    z = 1.3 * complex(math.cos(0.4), math.sin(0.4))
    r2 = 1.3**2
    ref = -math.exp(-r2) * laguerre_poly(5, 2 * r2) / math.pi
    assert ps.wigner_fock(5, z) == pytest.approx(ref, abs=1e-12)


def test_wigner_coherent_and_diagonal_examples():
    assert ps.wigner_coherent(0, 0) == pytest.approx(1 / math.pi)
    xs, _, W = ps.wigner_grid(ps.coherent_state(0))
    assert W.min() >= 0
    v = ps.wigner_diagonal(fs.noisy_fock_dist(1, 1.0), 0)
    assert v.value == pytest.approx(3 * math.exp(-2) / math.pi, abs=1e-13)
    assert v.accurate
    mix = fs.FockDistribution([0.5, 0.5])
    assert abs(ps.wigner_diagonal(mix, 0).value) < 1e-17


def test_wigner_boson_added_coherent_examples():
    assert ps.wigner_boson_added_coherent(0, 0) == pytest.approx(-1 / math.pi)
    assert abs(ps.wigner_boson_added_coherent(1, math.sqrt(2))) < 1e-16
    alpha = 0.6 + 0.3j
    for ang in np.linspace(0, 2 * math.pi, 13):
        z = alpha / math.sqrt(2) + complex(math.cos(ang), math.sin(ang)) / math.sqrt(2)
        assert abs(ps.wigner_boson_added_coherent(alpha, z)) < 1e-15


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_boson_added_vacuum_is_fock1(x, p):
    z = complex(x, p)
    assert abs(ps.wigner_boson_added_coherent(0, z) - ps.wigner_fock(1, z)) <= 1e-14


def test_boson_added_coherent_matches_diagonal_sum_when_phase_averaged():
    # phase-averaging a^dag|alpha> gives the boson-added Poisson distribution
    mu, z = 0.8, 0.7 + 0.2j
    phis = 2 * math.pi * np.arange(256) / 256
    avg = np.mean([ps.wigner_boson_added_coherent(math.sqrt(mu) * np.exp(1j * f), z) for f in phis])
    diag = ps.wigner_diagonal(fs.boson_added_coherent_dist(mu, 1), z).value
    assert avg == pytest.approx(diag, abs=1e-12)


@pytest.mark.parametrize(
    "fn",
    [
        lambda z: ps.wigner_fock(0, z),
        lambda z: ps.wigner_fock(3, z),
        lambda z: ps.wigner_fock(5, z),
        lambda z: ps.wigner_coherent(1 + 0.5j, z),
        lambda z: ps.wigner_thermal(0.7, z),
        lambda z: ps.wigner_boson_added_coherent(0.8 - 0.3j, z),
        lambda z: ps.wigner_diagonal(fs.noisy_fock_dist(2, 0.6), z).value,
    ],
)
def test_normalization(fn):
    assert grid_integral(fn) == pytest.approx(1.0, abs=1e-6)


def test_classical_positivity():
    xs = np.linspace(-6, 6, 121)
    Z = xs[:, None] + 1j * xs[None, :]
    assert np.all(ps.wigner_coherent(0.9 - 1.2j, Z) >= 0)
    assert np.all(ps.wigner_diagonal(fs.thermal_dist(1.5), Z).value >= 0)
    assert np.all(ps.wigner_diagonal(fs.coherent_dist(2.0), Z).value >= 0)


def test_thermal_closed_form_matches_diagonal_sum():
    z = np.linspace(0, 4, 9).astype(complex)
    np.testing.assert_allclose(ps.wigner_diagonal(fs.thermal_dist(0.9), z).value, ps.wigner_thermal(0.9, z), atol=1e-13)


@pytest.mark.parametrize("dist_fn", [lambda n: fs.thermal_dist(1.0, n), lambda n: fs.noisy_fock_dist(1, 3.0, n)])
def test_truncation_doubling_within_bound(dist_fn):
    short, long = dist_fn(20), dist_fn(40)
    z = np.linspace(0, 5, 26).astype(complex)
    a, b = ps.wigner_diagonal(short, z), ps.wigner_diagonal(long, z)
    assert a.error_bound > 0 and a.warning is not None
    assert np.all(np.abs(a.value - b.value) <= a.error_bound)


def test_min_wigner_fock1():
    report = ps.min_wigner(fs.fock_dist(1, 1))
    assert report.min_value == pytest.approx(-1 / math.pi, abs=1e-12)
    assert abs(report.argmin.z) < 1e-6 and report.negative


def test_mixed_boson_added_poisson_origin_value():
    for mu in (0.3, 1.0, 2.5):
        for p in (0.2, 0.5, 0.95):
            d = fs.prob_boson_added_coherent_dist(mu, p)
            w = ps.wigner_diagonal(d, 0)
            assert abs(w.value - ps.wigner_zero_mixed_boson_added_poisson(mu, p)) <= w.error_bound + 1e-15


def test_mixed_boson_added_poisson_minima():
    for mu in (0.5, 1.0, 2.0):
        report = ps.min_wigner(fs.prob_boson_added_coherent_dist(mu, 0.5))
        assert not report.negative and report.min_value >= -1e-10
    report = ps.min_wigner(fs.prob_boson_added_coherent_dist(0.5, 0.95))
    assert report.negative
    assert report.min_value <= ps.wigner_zero_mixed_boson_added_poisson(0.5, 0.95) + 1e-15


def test_min_wigner_two_dimensional_scan():
    state = ps.boson_added_coherent_state(0.8 + 0.4j)
    assert not state.symmetric
    report = ps.min_wigner(state)
    xs = np.linspace(-3, 3, 1201)
    W = ps.wigner_boson_added_coherent(0.8 + 0.4j, xs[None, :] + 1j * xs[:, None])
    assert report.min_value == pytest.approx(W.min(), abs=1e-5)
    assert report.min_value <= W.min() + 1e-12
    assert ps.min_wigner(ps.coherent_state(1 + 1j)).negative is False


def test_min_wigner_validation():
    with pytest.raises(DomainError):
        ps.min_wigner(fs.fock_dist(1, 1), radius=0)
    with pytest.raises(DomainError):
        ps.min_wigner(fs.fock_dist(1, 1), grid_n=2)
    with pytest.raises(DomainError):
        ps.PhasePoint(math.nan, 0.0)
    report = ps.min_wigner(fs.make_family("noisy-fock", k=1, mu=0.2))
    assert set(report.to_dict()) == {"min_value", "argmin", "negative"}


def test_p_function_closed_forms():
    for nbar in (0.01, 0.3, 2.0):
        assert ps.p_function_boson_added_thermal(nbar, 0) == pytest.approx(-1 / nbar**2, rel=1e-14)
        a = math.sqrt(nbar / (1 + nbar))
        assert abs(ps.p_function_boson_added_thermal(nbar, a)) < 1e-12 / nbar**3
    ref = (1 * 1.1 - 0.1) * math.exp(-1 / 0.1) / 0.1**3
    assert ps.p_function_boson_added_thermal(0.1, 1.0) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(DomainError):
        ps.p_function_boson_added_thermal(0.0, 0.5)


def test_p_functions_integrate_to_pi():
    for fn in (lambda z: ps.p_function_thermal(0.4, z), lambda z: ps.p_function_boson_added_thermal(0.4, z)):
        assert grid_integral(fn, radius=6) == pytest.approx(math.pi, abs=1e-6)


def test_phase_averaged_p_function():
    v = ps.p_function_phase_averaged(0.2, 0.0, 0.7, 0.3)
    ref = 0.7 * ps.p_function_boson_added_thermal(0.2, 0.3) + 0.3 * ps.p_function_thermal(0.2, 0.3)
    assert v.value == pytest.approx(ref, rel=1e-14)
    nbar, mu, p, alpha = 0.3, 1.2, 0.4, 0.8 + 0.2j

    def integrand(phi):
        pt = alpha - math.sqrt(mu) * complex(math.cos(phi), math.sin(phi))
        return p * ps.p_function_boson_added_thermal(nbar, pt) + (1 - p) * ps.p_function_thermal(nbar, pt)

    ref, _ = integrate.quad(integrand, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    v = ps.p_function_phase_averaged(nbar, mu, p, alpha)
    assert v.value == pytest.approx(ref / (2 * math.pi), abs=1e-9)
    assert v.warning is None


def test_phase_averaged_negativity():
    # p = 1: the ring |alpha|^2 = mu carries the negativity for small nbar
    assert ps.p_function_phase_averaged(0.01, 0.5, 1.0, math.sqrt(0.5)).value < 0
    radial = [ps.p_function_phase_averaged(0.01, 1.0, 0.05, r).value for r in np.linspace(0, 2, 81)]
    assert min(radial) < 0
    warned = ps.p_function_phase_averaged(5e-4, 1.0, 0.05, 1.0)
    assert warned.warning is not None
    with pytest.raises(DomainError):
        ps.p_function_phase_averaged(0.1, -1.0, 0.5, 0.0)
