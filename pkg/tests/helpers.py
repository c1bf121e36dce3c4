"""Independent reference constructions shared by the test modules."""

import math

import numpy as np


def coherent_mixture(mus, weights, n_max):
    """``sum_i w_i Poisson(mu_i)`` computed term by term from the pmf definition."""
    k = np.arange(n_max + 1)
    log_fact = np.array([math.lgamma(j + 1) for j in k])
    mus = np.asarray(mus, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        log_terms = -mus + k * np.log(mus) - log_fact
    log_terms[:, 0] = -mus[:, 0]
    return (np.asarray(weights)[:, None] * np.exp(log_terms)).sum(axis=0)


def random_coherent_mixtures(rng, count, n_max, mu_max=10.0, max_components=10):
    rows = []
    for _ in range(count):
        c = int(rng.integers(1, max_components + 1))
        mus = rng.uniform(0.0, mu_max, c)
        w = rng.dirichlet(np.ones(c))
        rows.append(coherent_mixture(mus, w, n_max))
    return np.array(rows)


def factorial_weights(probs):
    probs = np.asarray(probs, dtype=float)
    return probs * np.array([float(math.factorial(j)) for j in range(probs.shape[-1])])


def find_root(f, lo, hi, tol=1e-13):
    """Plain bisection on a sign change; kept separate from the library's solvers."""
    flo = f(lo)
    assert (flo > 0) != (f(hi) > 0), "no sign change in bracket"
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
