"""Polynomial utilities: (it, itau) polynomials, Hermite values, sawtooth,
and moment/cumulant conversion helpers.

Coefficients of ItPolynomial are real: a term c * (it)^a * (itau)^b stores
the powers of i in the exponents, so multiplying two terms just adds
exponents and multiplies the real coefficients.
"""

from __future__ import annotations

import math
from math import comb


class ItPolynomial:
    """Bivariate polynomial in the formal variables (it) and (itau).

    Immutable; represented as a mapping {(a, b): coeff}. Terms with
    negligible coefficients are dropped at construction.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None, drop_tol=0.0):
        cleaned = {}
        if coeffs:
            for (a, b), c in coeffs.items():
                if c != 0.0 and abs(c) > drop_tol:
                    cleaned[(int(a), int(b))] = float(c)
        object.__setattr__(self, "coeffs", cleaned)

    def __setattr__(self, name, value):
        raise AttributeError("ItPolynomial is immutable")

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def term(cls, a, b, c=1.0):
        return cls({(a, b): c})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return ItPolynomial(out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return ItPolynomial({k: v * c for k, v in self.coeffs.items()})

    def __mul__(self, other):
        out = {}
        for (a1, b1), c1 in self.coeffs.items():
            for (a2, b2), c2 in other.coeffs.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0.0) + c1 * c2
        return ItPolynomial(out)

    def max_degree(self):
        """(max power of it, max power of itau)."""
        if not self.coeffs:
            return (0, 0)
        return (max(a for a, _ in self.coeffs), max(b for _, b in self.coeffs))

    def total_degrees(self):
        """(min, max) total degree over nonzero terms; (0, 0) if zero."""
        if not self.coeffs:
            return (0, 0)
        degs = [a + b for a, b in self.coeffs]
        return (min(degs), max(degs))

    def coefficient(self, a, b=0):
        return self.coeffs.get((a, b), 0.0)

    def is_univariate(self):
        return all(b == 0 for _, b in self.coeffs)

    def __repr__(self):
        terms = ", ".join(
            f"({a},{b}): {c:.6g}" for (a, b), c in sorted(self.coeffs.items())
        )
        return f"ItPolynomial({{{terms}}})"


def hermite_he(v, x):
    """Probabilists' Hermite polynomial He_v(x).

    He_0 = 1, He_1 = x, He_{v+1} = x He_v - v He_{v-1}.
    """
    if v < 0:
        raise ValueError("Hermite order must be >= 0")
    h_prev, h = 1.0, x
    if v == 0:
        return 1.0
    for k in range(1, v):
        h_prev, h = h, x * h - k * h_prev
    return h


def sawtooth_s1(x):
    """Periodic Euler-Maclaurin function S1(x) = [x] - x + 1/2.

    Equals +1/2 at integers and 0 at half-integers; mean zero over a period.
    """
    return math.floor(x) - x + 0.5


def raw_to_central(raw):
    """Central moments [mu_0..mu_K] from raw moments [m_0=1, m_1, .., m_K]."""
    mean = raw[1]
    out = []
    for n in range(len(raw)):
        mu = 0.0
        for k in range(n + 1):
            mu += comb(n, k) * raw[k] * (-mean) ** (n - k)
        out.append(mu)
    return out


def central_to_raw(central, mean):
    """Raw moments from central moments [1, 0, mu_2, ...] and the mean."""
    out = []
    for n in range(len(central)):
        m = 0.0
        for k in range(n + 1):
            m += comb(n, k) * central[k] * mean ** (n - k)
        out.append(m)
    return out


def cumulants_to_raw(kappa):
    """Raw moments [m_0..m_K] from cumulants [0, k_1, k_2, ..].

    kappa[0] is ignored (set it to 0); uses the recursion
    m_n = sum_{j=0}^{n-1} C(n-1, j) k_{n-j} m_j.
    """
    K = len(kappa) - 1
    m = [1.0] + [0.0] * K
    for n in range(1, K + 1):
        s = 0.0
        for j in range(n):
            s += comb(n - 1, j) * kappa[n - j] * m[j]
        m[n] = s
    return m


def cumulants_to_central(kappa):
    """Central moments from cumulants; kappa[1] (the mean) is ignored."""
    k0 = list(kappa)
    if len(k0) > 1:
        k0[1] = 0.0
    return cumulants_to_raw(k0)


# ---- small dense polynomials in one real parameter (ascending coeffs) ----

def poly_mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def poly_add(p, q):
    n = max(len(p), len(q))
    out = [0.0] * n
    for i, a in enumerate(p):
        out[i] += a
    for i, b in enumerate(q):
        out[i] += b
    return out


def poly_scale(p, c):
    return [a * c for a in p]


def poly_diff(p):
    if len(p) <= 1:
        return [0.0]
    return [i * a for i, a in enumerate(p)][1:]


def poly_eval(p, x):
    acc = 0.0
    for a in reversed(p):
        acc = acc * x + a
    return acc
