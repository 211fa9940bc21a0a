"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy import integrate


def K_quadrature(d, eta, alpha_prime):
    """Rescaling constant from its integral representation.

    ``int_0^inf x^(d/2-1) (1 - e^-x) x^(-1-alpha) dx`` with ``alpha = d/2 - 1 + a'``
    reduces to ``int_0^inf (1 - e^-x) x^(-1-a') dx``.
    """
    a = alpha_prime
    g = lambda x: -math.expm1(-x) / x if x > 0 else 1.0
    head, _ = integrate.quad(g, 0, 1, weight="alg", wvar=(-a, 0.0), epsabs=0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda x: -math.expm1(-x) * x ** (-1 - a), 1, np.inf, epsabs=0, epsrel=1e-13,
                             limit=400)
    return (head + tail) / (2**d * (math.pi * eta) ** (d / 2) * math.gamma(d / 2))


def _D(r, a):
    r = np.asarray(r, dtype=float)
    return -(r**a) + 2 * (r + 1) ** a - (r + 2) ** a


def upsilon_brute(a, terms=10**6):
    return math.fsum(_D(np.arange(terms), a) ** 2) + 2.0


def lambda_brute(a, terms=10**6):
    r = np.arange(terms)
    return 2 * (2**a - 2) + math.fsum(_D(r + 1, a) * _D(r, a))


def eigenfunction_scalar(k, y, kappa):
    out = 2 ** (len(k) / 2)
    for kl, yl, cl in zip(k, y, kappa):
        out *= math.sin(math.pi * kl * yl) * math.exp(-cl * yl / 2)
    return out
