"""Centering of a decomposable statistic: the mean part Lambda_N, the
regression coefficient gamma_N, the residual kernels g_m and their joint
moments with the cell frequencies, in the scale-free hat normalization.
"""

from __future__ import annotations

import math
from math import comb

import numpy as np

from .errors import DegenerateStatistic, MissingMoments, OrderTooHigh
from .kernels import MOMENT_ORDER, CompoundSumKernel
from .models import cell_support


def float_gcd(values, tol=1e-9):
    """Approximate positive GCD of a set of reals; 0.0 if all ~0."""
    g = 0.0
    for v in values:
        v = abs(float(v))
        if v < tol:
            continue
        if g == 0.0:
            g = v
            continue
        while v > tol * max(1.0, g):
            g, v = v, g % v
            if v > tol and g - v < tol * max(1.0, g):
                v = 0.0
    return g


class _CellData:
    """Per-cell working data: truncated support, pmf, kernel values."""

    __slots__ = ("xs", "w", "mean", "fvals", "law", "raw", "ef", "cov",
                 "varf", "g", "c")

    def __init__(self, xs, w, mean):
        self.xs = xs
        self.w = w
        self.mean = mean
        self.fvals = None
        self.law = None
        self.raw = None
        self.g = None
        self.c = None


class CenteredStat:
    """Immutable result of center(); all quantities of the centering step.

    moments[m, i, j] holds E g_m(xi_m)^i (xi_m - E xi_m)^j for i + j <= 6.
    """

    def __init__(self, gum, kernel, lam, gamma, sigma2, cells, moments,
                 tail_eps):
        self.gum = gum
        self.kernel = kernel
        self.lam = lam
        self.gamma = gamma
        self.sigma2 = sigma2
        self.sigma = math.sqrt(sigma2)
        self.cells = cells
        self.moments = moments
        self.tail_eps = tail_eps

    @property
    def N(self):
        return self.gum.N

    @property
    def B_N(self):
        return self.gum.B_N

    def joint_alpha(self, i, j):
        """alpha_{i,j,N} = N^{(i+j)/2 - 1} sum_m E (g_m/sigma)^i (xi~_m/B)^j."""
        if i + j > MOMENT_ORDER:
            raise OrderTooHigh(f"joint moment order {i + j} > {MOMENT_ORDER}")
        n = self.N
        tot = float(np.sum(self.moments[:, i, j]))
        return n ** ((i + j) / 2.0 - 1.0) * tot / (self.sigma**i * self.B_N**j)

    def alpha_hat(self, m, i, j):
        """Per-cell hatted moment E g^_m^i xi^_m^j."""
        if i + j > MOMENT_ORDER:
            raise OrderTooHigh(f"joint moment order {i + j} > {MOMENT_ORDER}")
        n = self.N
        return (n ** ((i + j) / 2.0) * self.moments[m, i, j]
                / (self.sigma**i * self.B_N**j))

    def percell_hat_sum(self, i1, j1, i2, j2):
        """N^{-1} sum_m alpha^_{i1 j1 m} * alpha^_{i2 j2 m}."""
        n = self.N
        s = float(np.sum(self.moments[:, i1, j1] * self.moments[:, i2, j2]))
        power = (i1 + j1 + i2 + j2) / 2.0
        return (n**power * s
                / (self.sigma ** (i1 + i2) * self.B_N ** (j1 + j2)) / n)

    def check_orthogonality(self):
        """The two identities of the centering construction, recomputed from
        the materialized tables (not assumed)."""
        return {
            "residual_mean": float(np.sum(self.moments[:, 1, 0])),
            "residual_cov": float(np.sum(self.moments[:, 1, 1])),
        }

    # -- absolute moments (diagnostics) ------------------------------------

    def abs_g_moment_total(self, order):
        """sum_m E |g_m(xi_m)|^order; order may be fractional."""
        total = 0.0
        for cd in self.cells:
            if cd.g is not None:
                total += float(np.sum(cd.w * np.abs(cd.g) ** order))
            else:
                for x, wx, cx in zip(cd.xs, cd.w, cd.c):
                    vals, probs = _compound_dist(cd.law, int(x))
                    total += wx * float(np.sum(probs * np.abs(vals - cx) ** order))
        return total

    def abs_xi_moment_total(self, order):
        total = 0.0
        for cd in self.cells:
            total += float(np.sum(cd.w * np.abs(cd.xs - cd.mean) ** order))
        return total

    def lindeberg(self, eps):
        """Truncated second/third moment functionals of the hatted variables."""
        n = self.N
        sig_hat = self.sigma / math.sqrt(n)
        b_hat = self.B_N / math.sqrt(n)
        l2 = 0.0
        s1 = 0.0
        s2 = 0.0
        for cd in self.cells:
            xi_hat = (cd.xs - cd.mean) / b_hat
            inside = np.abs(xi_hat) <= eps
            s1 += float(np.sum(cd.w * np.abs(xi_hat) ** 3 * inside))
            s2 += float(np.sum(cd.w * xi_hat**2 * ~inside))
            if cd.g is not None:
                g_hat = cd.g / sig_hat
                l2 += float(np.sum(cd.w * g_hat**2 * (np.abs(g_hat) > eps)))
            else:
                for x, wx, cx in zip(cd.xs, cd.w, cd.c):
                    vals, probs = _compound_dist(cd.law, int(x))
                    g_hat = (vals - cx) / sig_hat
                    l2 += wx * float(
                        np.sum(probs * g_hat**2 * (np.abs(g_hat) > eps)))
        return {
            "L2": l2,
            "script_L1": s1 / n**1.5,
            "script_L2": s2 / n,
        }

    # -- joint characteristic function (Bartlett numerator factor) ---------

    def cell_joint_charfn(self, m, t_over_sigma, tau_over_B):
        """E exp(i a g_m(xi_m) + i b (xi_m - E xi_m)) with a = t/sigma_N,
        b an array of tau/B_N values."""
        cd = self.cells[m]
        b = np.asarray(tau_over_B, dtype=float)
        xi = cd.xs - cd.mean
        if cd.g is not None:
            phases = np.exp(1j * (t_over_sigma * cd.g + np.multiply.outer(b, xi)))
            return phases @ cd.w
        # E e^{i a f(x)} | xi = x is phi_Y(a)^x, then shift by the centering
        law = cd.law
        phi_y = complex(law.charfn(np.array([t_over_sigma]))[0])
        per_x = np.exp(-1j * t_over_sigma * cd.c) * phi_y ** cd.xs
        phases = np.exp(1j * np.multiply.outer(b, xi)) * per_x
        return phases @ cd.w


_COMPOUND_CACHE = {}


def _compound_dist(law, j):
    """Support values and probabilities of the j-fold convolution of the
    increment law (exact enumeration on the increment lattice)."""
    key = (tuple(law.support), tuple(law.probs), j)
    if key in _COMPOUND_CACHE:
        return _COMPOUND_CACHE[key]
    support = np.asarray(law.support, dtype=float)
    probs = np.asarray(law.probs, dtype=float)
    step = float_gcd(np.diff(np.sort(support))) if len(support) > 1 else 1.0
    if step == 0.0:
        step = 1.0
    base = support.min()
    idx = np.rint((support - base) / step).astype(int)
    if np.max(np.abs(support - (base + idx * step))) > 1e-9 * max(1.0, step):
        raise ValueError("increment support is not lattice-commensurable")
    arr0 = np.zeros(idx.max() + 1)
    np.add.at(arr0, idx, probs)
    if j == 0:
        out = (np.array([0.0]), np.array([1.0]))
    else:
        arr = arr0
        for _ in range(j - 1):
            arr = np.convolve(arr, arr0)
        vals = j * base + step * np.arange(len(arr))
        out = (vals, arr)
    _COMPOUND_CACHE[key] = out
    return out


def center(gum, kernel, tail_eps=1e-12):
    """Compute the centering quantities and joint moment tables.

    Raises DegenerateStatistic when the residual variance vanishes (the
    kernel is affine in the frequencies) and SupportTooShort when a value
    table does not cover a cell's truncated support.
    """
    n_cells = gum.N
    cells = []
    compound = isinstance(kernel, CompoundSumKernel)
    lam = 0.0
    cov_sum = 0.0
    varf_sum = 0.0
    for m, cell in enumerate(gum.cells):
        xs, w = cell_support(cell, tail_eps)
        cd = _CellData(xs.astype(float), w, cell.mean)
        xi = cd.xs - cd.mean
        if compound:
            law = kernel.laws[m]
            cd.law = law
            raw = np.empty((len(xs), MOMENT_ORDER + 1))
            for r, x in enumerate(xs):
                raw[r] = law.sum_raw_moments(int(x))
            cd.raw = raw
            ef = float(np.sum(w * raw[:, 1]))
            cov = float(np.sum(w * raw[:, 1] * xi)) - ef * float(np.sum(w * xi))
            varf = float(np.sum(w * raw[:, 2])) - ef**2
        else:
            f = np.asarray(kernel.values(m, xs.astype(int)), dtype=float)
            cd.fvals = f
            ef = float(np.sum(w * f))
            cov = float(np.sum(w * f * xi)) - ef * float(np.sum(w * xi))
            varf = float(np.sum(w * f**2)) - ef**2
        cd.ef = ef
        cd.cov = cov
        cd.varf = varf
        lam += ef
        cov_sum += cov
        varf_sum += varf
        cells.append(cd)

    gamma = cov_sum / gum.B_N2
    moments = np.zeros((n_cells, MOMENT_ORDER + 1, MOMENT_ORDER + 1))
    sigma2 = 0.0
    for m, cd in enumerate(cells):
        xi = cd.xs - cd.mean
        c = cd.ef + gamma * xi
        cd.c = c
        if not compound:
            cd.g = cd.fvals - c
            gp = np.ones_like(cd.g)
            for i in range(MOMENT_ORDER + 1):
                xp = np.ones_like(xi)
                for j in range(MOMENT_ORDER + 1 - i):
                    moments[m, i, j] = float(np.sum(cd.w * gp * xp))
                    xp = xp * xi
                gp = gp * cd.g
        else:
            # E (f(x) - c)^i from the raw conditional moments, per support x
            for i in range(MOMENT_ORDER + 1):
                cond = np.zeros(len(cd.xs))
                for l in range(i + 1):
                    cond += comb(i, l) * cd.raw[:, l] * (-c) ** (i - l)
                xp = np.ones_like(xi)
                for j in range(MOMENT_ORDER + 1 - i):
                    moments[m, i, j] = float(np.sum(cd.w * cond * xp))
                    xp = xp * xi
        sigma2 += moments[m, 2, 0]

    if sigma2 <= 1e-14 * max(varf_sum, 1e-300):
        raise DegenerateStatistic(
            f"sigma_N^2 = {sigma2:.3e} is negligible against "
            f"sum Var f_m = {varf_sum:.3e}")
    return CenteredStat(gum, kernel, lam, gamma, sigma2, cells, moments,
                        tail_eps)


def joint_alpha(centered, i, j):
    return centered.joint_alpha(i, j)


def check_orthogonality(centered):
    return centered.check_orthogonality()
