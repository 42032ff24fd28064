"""Edgeworth expansion pipeline: cumulant polynomials P_k in (it, itau),
tau-integration to G_k, geometric-series inversion to Q_j, the expansion
polynomial W^(s), and its CDF / lattice point-mass evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import erfc

from .errors import MissingMoments, OffLattice, UnsupportedOrder
from .kernels import MOMENT_ORDER
from .polynomials import ItPolynomial, hermite_he, sawtooth_s1

SQRT2PI = math.sqrt(2.0 * math.pi)


def norm_cdf(u):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * erfc(-u / math.sqrt(2.0))


def norm_pdf(u):
    return math.exp(-0.5 * u * u) / SQRT2PI


def build_p(centered, k):
    """The k-th Edgeworth cumulant polynomial (k in {0, 1, 2}) in the
    normalized-moment parametrization; coefficients are real numbers
    attached to monomials (it)^a (itau)^b."""
    if k == 0:
        return ItPolynomial.constant(1.0)
    if k == 1:
        need = 3
    elif k == 2:
        need = 4
    else:
        raise UnsupportedOrder(f"P_{k} not implemented (s <= 5)")
    if need > MOMENT_ORDER:
        raise MissingMoments(f"joint moments of order {need} unavailable")

    if k == 1:
        coeffs = {}
        for i in range(4):
            j = 3 - i
            coeffs[(i, j)] = comb(3, i) * centered.joint_alpha(i, j) / 6.0
        return ItPolynomial(coeffs)

    # k == 2: fourth-moment block minus three times the averaged squared
    # second-moment form, plus P_1^2 / 2
    coeffs = {}
    for i in range(5):
        j = 4 - i
        coeffs[(i, j)] = comb(4, i) * centered.joint_alpha(i, j) / 24.0
    s2020 = centered.percell_hat_sum(2, 0, 2, 0)
    s2011 = centered.percell_hat_sum(2, 0, 1, 1)
    s1111 = centered.percell_hat_sum(1, 1, 1, 1)
    s2002 = centered.percell_hat_sum(2, 0, 0, 2)
    s1102 = centered.percell_hat_sum(1, 1, 0, 2)
    s0202 = centered.percell_hat_sum(0, 2, 0, 2)
    sq = ItPolynomial({
        (4, 0): s2020,
        (3, 1): 4.0 * s2011,
        (2, 2): 4.0 * s1111 + 2.0 * s2002,
        (1, 3): 4.0 * s1102,
        (0, 4): s0202,
    })
    p1 = build_p(centered, 1)
    return ItPolynomial(coeffs) - sq.scale(1.0 / 8.0) + (p1 * p1).scale(0.5)


def tau_integrate(poly, x):
    """Integrate out itau against the tilted Gaussian: each factor (itau)^b
    becomes He_b(x); the Gaussian prefactor cancels exactly."""
    out = {}
    for (a, b), c in poly.coeffs.items():
        term = c * hermite_he(b, x)
        if term != 0.0:
            out[(a, 0)] = out.get((a, 0), 0.0) + term
    return ItPolynomial(out)


@dataclass(frozen=True)
class ExpansionResult:
    """W^(s) collapsed to a univariate polynomial in (it) with the model's N
    baked into the coefficients, plus the coordinates of the statistic."""

    s: int
    x_N: float
    W: ItPolynomial
    lam: float
    gamma: float
    sigma: float
    B_N: float
    N: int
    provenance: dict

    def to_json(self):
        return {
            "s": self.s,
            "x_N": self.x_N,
            "monomials": [
                {"a": a, "coeff": c}
                for (a, _), c in sorted(self.W.coeffs.items())
            ],
            "Lambda_N": self.lam,
            "gamma_N": self.gamma,
            "sigma_N": self.sigma,
            "B_N": self.B_N,
        }


def build_w(centered, s, x_N=None):
    """Assemble W^(s)(t, x_N): G_v from P_v, Q_j from the geometric-series
    inversion of the tau-integrated constants, then the double sum."""
    if s not in (3, 4, 5):
        raise UnsupportedOrder(f"s must be 3, 4 or 5, got {s}")
    if x_N is None:
        x_N = centered.gum.x_N
    n_cells = centered.N
    order = s - 3

    g_polys = [ItPolynomial.constant(1.0)]
    for v in range(1, order + 1):
        g_polys.append(tau_integrate(build_p(centered, v), x_N))
    g0 = [p.coefficient(0) for p in g_polys]  # G_v(0, x_N)

    # 1 / (1 + sum_{v>=1} eps^v G_v(0)) as a series in eps = N^{-1/2}
    q = [1.0] + [0.0] * order
    for j in range(1, order + 1):
        q[j] = -sum(g0[i] * q[j - i] for i in range(1, j + 1))

    w = ItPolynomial()
    for m in range(order + 1):
        weight = n_cells ** (-m / 2.0)
        for v in range(m + 1):
            w = w + g_polys[v].scale(q[m - v] * weight)

    alphas = {}
    for i in range(5):
        for j in range(5 - i):
            alphas[f"alpha_{i}{j}"] = centered.joint_alpha(i, j)
    return ExpansionResult(
        s=s, x_N=float(x_N), W=w, lam=centered.lam, gamma=centered.gamma,
        sigma=centered.sigma, B_N=centered.B_N, N=n_cells,
        provenance=alphas)


def cdf_expansion(result, u):
    """The CDF-side expansion: Phi(u) plus the Hermite substitution of every
    (it)^a monomial, a >= 1."""
    u = float(u)
    val = norm_cdf(u)
    phi = norm_pdf(u)
    for (a, _), c in result.W.coeffs.items():
        if a == 0:
            continue  # constant term is Phi itself (coefficient 1)
        val -= c * phi * hermite_he(a - 1, u)
    return val


def cdf_expansion_deriv(result, u):
    """Analytic d/du of cdf_expansion via the Hermite recurrence."""
    u = float(u)
    phi = norm_pdf(u)
    acc = 1.0
    for (a, _), c in result.W.coeffs.items():
        if a == 0:
            continue
        acc += c * hermite_he(a, u)
    return phi * acc


def standardize(result, z):
    """Map a raw statistic value to the expansion coordinate u_z."""
    return (z - result.lam - result.x_N * result.B_N * result.gamma) / result.sigma


def pmf_expansion(result, z, h, z0=None):
    """Point-mass approximation (h/sigma_N) * d/du W^(s) at u_z for a lattice
    statistic with span h; z0, when given, anchors the lattice congruence."""
    if h <= 0:
        raise ValueError("lattice span h must be positive")
    if z0 is not None:
        frac = (z - z0) / h
        if abs(frac - round(frac)) > 1e-9:
            raise OffLattice(f"value {z} is not on the lattice {z0} + {h}*Z")
    u_z = standardize(result, z)
    return (h / result.sigma) * cdf_expansion_deriv(result, u_z)


def lattice_cdf_corrected(result, u, h):
    """Two-term CDF expansion plus the sawtooth Euler-Maclaurin continuity
    correction for a lattice statistic with span h."""
    if result.s < 4:
        raise UnsupportedOrder("continuity correction needs s >= 4")
    shift = result.lam + result.x_N * result.B_N * result.gamma
    s1 = sawtooth_s1((u * result.sigma + shift) / h)
    return cdf_expansion(result, u) + (h / result.sigma) * s1 * norm_pdf(u)


def w5_reference(centered, u):
    """Hand-coded three-term CDF expansion at x_N = 0: an independent coding
    of the explicit formula, used to cross-check the generic pipeline."""
    a30 = centered.joint_alpha(3, 0)
    a12 = centered.joint_alpha(1, 2)
    a21 = centered.joint_alpha(2, 1)
    a03 = centered.joint_alpha(0, 3)
    a40 = centered.joint_alpha(4, 0)
    a22 = centered.joint_alpha(2, 2)
    s2020 = centered.percell_hat_sum(2, 0, 2, 0)
    s1111 = centered.percell_hat_sum(1, 1, 1, 1)
    s2002 = centered.percell_hat_sum(2, 0, 0, 2)
    n = centered.N
    u = float(u)
    phi = norm_pdf(u)
    first = ((u * u - 1.0) / 6.0 * a30 - 0.5 * a12) * phi / math.sqrt(n)
    second = phi / n * (
        (u**5 - 10.0 * u**3 + 15.0 * u) / 72.0 * a30**2
        + (u**3 - 3.0 * u) / 24.0
        * (a40 - 3.0 * s2020 - 3.0 * a21**2 - 2.0 * a30 * a12)
        + u / 8.0
        * (3.0 * a12**2 + 2.0 * a21 * a03 - 2.0 * a22
           + 4.0 * s1111 + 2.0 * s2002)
    )
    return norm_cdf(u) - first - second
