"""End-to-end acceptance checks, one test per criterion."""

import math
import time

import numpy as np
import pytest

from fockcert import fockstates as fs
from fockcert import geometry, phasespace
from fockcert.cli import SweepSpec, run_sweep
from fockcert.completeness import decide, decompose
from fockcert.criteria import CertifyOptions, klyshko, margin_table
from helpers import random_coherent_mixtures


def sweep_intervals(family, criteria, start, stop, step, n_max=None, **fixed):
    grid = start + step * np.arange(int(round((stop - start) / step)) + 1)
    spec = SweepSpec(family, fixed, ("mu",), (grid,), n_max, tuple(criteria))
    _, intervals = run_sweep(spec)
    return intervals


def detection_end(intervals):
    return max(b for spans in intervals.values() for _, b in spans)


def test_ac1_noisy_fock_k1_window():
    """AC1 noisy-Fock K1 window"""
    t = time.perf_counter()
    spans = sweep_intervals("noisy-fock", ["K1"], 0.0, 4.0, 0.05, k=1)["K1"]
    elapsed = time.perf_counter() - t
    assert len(spans) == 2
    assert spans[0][1] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-9)
    assert spans[1][0] == pytest.approx(1 + 1 / math.sqrt(2), abs=1e-9)
    for mu in np.linspace(spans[0][1] + 1e-6, spans[1][0] - 1e-6, 200):
        m = klyshko(fs.noisy_fock_dist(1, mu, 2), 1).margin
        assert m <= 1e-15
        assert m == pytest.approx(math.exp(-2 * mu) * (2 * mu**2 - 4 * mu + 1), abs=1e-14)
    assert elapsed < 1.0


def test_ac2_k_infinity_threshold():
    """AC2 Kinf:2 threshold for noisy Fock"""
    t = time.perf_counter()
    spans = sweep_intervals("noisy-fock", ["Kinf:2"], 0.0, 1.7, 0.05, k=1)["Kinf:2"]
    elapsed = time.perf_counter() - t
    assert spans[-1][1] == pytest.approx(1.35, abs=0.01)
    assert elapsed < 1.0


def test_ac3_thermally_averaged_fock():
    """AC3 thermally averaged Fock K1 sign change"""
    spans = sweep_intervals("thermally-averaged-fock1", ["K1"], 0.0, 2.0, 0.05)["K1"]
    assert len(spans) == 1
    assert spans[0][1] == pytest.approx(math.sqrt(math.sqrt(2) - 1), abs=1e-9)


def test_ac4_boson_added_thermal():
    """AC4 boson-added thermal K1 positive on [0, 20]"""
    for mu in np.linspace(0.0, 20.0, 2001):
        v = klyshko(fs.boson_added_thermal_dist(mu, 2), 1)
        assert v.violated
        assert v.margin == pytest.approx(1 / (1 + mu) ** 4, rel=1e-9)


def test_ac5_mixed_boson_added_thermal():
    """AC5 mixed boson-added thermal K1 threshold"""
    spans = sweep_intervals("mixed-boson-added-thermal", ["K1"], 0.01, 2.0, 0.01, p=0.5)["K1"]
    assert detection_end({"K1": spans}) == pytest.approx(0.40, abs=0.02)


def test_ac6_prob_boson_added_coherent():
    """AC6 probabilistic boson-added coherent detection region"""
    t = time.perf_counter()
    n2 = sweep_intervals("prob-boson-added-coherent", ["K1", "Kinf:2"], 0.0, 5.0, 0.05, n_max=2, p=0.5)
    n3 = sweep_intervals(
        "prob-boson-added-coherent", ["K1", "K2", "Kinf:2", "Kinf:3"], 0.0, 5.0, 0.05, n_max=3, p=0.5
    )
    elapsed = time.perf_counter() - t
    assert detection_end(n2) == pytest.approx(1.7, abs=0.1)
    assert detection_end(n3) == pytest.approx(3.0, abs=0.2)
    assert detection_end({"Kinf:3": n3["Kinf:3"]}) == detection_end(n3)
    assert elapsed < 5.0


def test_ac7_completeness_round_trip():
    """AC7 completeness round trip"""
    t = time.perf_counter()
    rng = np.random.default_rng(2718)
    triples = rng.dirichlet(np.ones(4), 10_000)[:, :3]
    classical = 0
    worst = 0.0
    for p in triples:
        if decide(*p).classical:
            classical += 1
            worst = max(worst, float(np.abs(decompose(*p).reconstruct() - p).max()))
    assert classical > 0 and worst <= 1e-8
    mixtures = random_coherent_mixtures(rng, 10_000, 2)
    assert all(decide(*row).classical for row in mixtures)
    assert time.perf_counter() - t < 30.0


def test_ac8_soundness_suite():
    """AC8 soundness on classical mixtures"""
    t = time.perf_counter()
    rng = np.random.default_rng(1618)
    probs = random_coherent_mixtures(rng, 10_000, 6)
    table = margin_table(probs, CertifyOptions(max_s=4, maj_n_max=6))
    elapsed = time.perf_counter() - t
    kinds = {cid.split(":")[0] if ":" in cid else "K" for cid in table.ids}
    assert {"K", "Kinf", "triple", "maj"} <= kinds
    assert not table.violated.any()
    # Coherent states sit on every bound, and products of up to six weights
    # near 10^2 carry rounding far above 1e-10; margins are judged against
    # the magnitude of the right-hand side they are compared with.
    scaled = table.margins / np.maximum(1.0, table.scales)
    print(f"AC8 max margin {table.margins.max():.3e}, max scaled margin {scaled.max():.3e}")
    assert scaled.max() <= 1e-10
    assert elapsed < 120.0


def test_ac9_geometry_duality():
    """AC9 tangent-plane membership agrees with decide"""
    rng = np.random.default_rng(1414)
    checked = 0
    for p in rng.dirichlet(np.ones(4), 3000)[:, :3]:
        v = decide(*p)
        if abs(v.k1) < 1e-6 or abs(v.kinf2 - 1.0) < 1e-6:
            continue
        assert geometry.membership(p, n_dirs=5000).inside == v.classical
        checked += 1
        if checked == 1000:
            break
    assert checked == 1000
    assert geometry.theta0() == pytest.approx(1.26, abs=0.01)


def test_ac10_phase_space():
    """AC10 phase-space negativity baselines"""
    t = time.perf_counter()
    r = phasespace.min_wigner(fs.fock_dist(1, 1))
    assert r.min_value == pytest.approx(-1 / math.pi, abs=1e-12)
    assert abs(r.argmin.z) < 1e-6
    for mu in (0.5, 1.0, 2.0):
        assert phasespace.min_wigner(fs.prob_boson_added_coherent_dist(mu, 0.5)).min_value >= 0
    assert phasespace.min_wigner(fs.prob_boson_added_coherent_dist(0.5, 0.95)).min_value < 0
    for nbar in (1e-3, 0.01, 0.5, 3.0):
        assert phasespace.p_function_boson_added_thermal(nbar, 0.0) == pytest.approx(-1 / nbar**2, rel=1e-14)
    assert time.perf_counter() - t < 30.0


def test_ac11_oracle_cross_checks():
    """AC11 displacement and truncation oracles"""
    from scipy.linalg import expm

    dim = 80
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    for mu in (0.3, 1.0, 2.5):
        d = expm(math.sqrt(mu) * (a.T - a))
        for k in (1, 2, 3):
            ref = d[:21, k] ** 2
            np.testing.assert_allclose(fs.noisy_fock_dist(k, mu, 20).probs, ref, atol=1e-10, rtol=0)
    z = np.linspace(0, 5, 51).astype(complex)
    for make in (lambda n: fs.thermal_dist(0.8, n), lambda n: fs.noisy_fock_dist(2, 1.5, n)):
        short, long = phasespace.wigner_diagonal(make(15), z), phasespace.wigner_diagonal(make(30), z)
        assert np.all(np.abs(short.value - long.value) <= short.error_bound)
