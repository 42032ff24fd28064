"""Urn model cell laws: Poisson / binomial / negative-binomial cells,
calibration of the free parameter nu so that the drift x_N vanishes,
exact central moments and characteristic functions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import InfeasibleTotal, NonpositiveShape, OrderTooHigh
from .polynomials import (
    cumulants_to_central,
    poly_add,
    poly_diff,
    poly_eval,
    poly_mul,
    poly_scale,
)

POISSON = "poisson"
BINOMIAL = "binomial"
NEGBINOMIAL = "negbinomial"
FAMILIES = (POISSON, BINOMIAL, NEGBINOMIAL)

#: Highest central-moment order the recurrences serve.
K_MAX = 12


@dataclass(frozen=True)
class CellLaw:
    """One cell of a generalized urn model.

    family : "poisson" | "binomial" | "negbinomial"
    shape  : p_m (Poisson weight), omega_m (binomial count) or d_m (NB order)
    nu     : free parameter; Poisson cell mean is nu * p_m, otherwise the
             success probability.
    """

    family: str
    shape: float
    nu: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.shape <= 0:
            raise NonpositiveShape(f"shape must be > 0, got {self.shape}")
        if self.family == BINOMIAL:
            if abs(self.shape - round(self.shape)) > 1e-9:
                raise NonpositiveShape("binomial omega_m must be an integer")
            if not 0 < self.nu < 1:
                raise ValueError("binomial nu must lie in (0, 1)")
        elif self.family == NEGBINOMIAL:
            if not 0 < self.nu < 1:
                raise ValueError("negative-binomial nu must lie in (0, 1)")
        elif self.nu <= 0:
            raise ValueError("Poisson nu must be positive")

    @property
    def mean(self):
        if self.family == POISSON:
            return self.nu * self.shape
        if self.family == BINOMIAL:
            return self.shape * self.nu
        rho = self.nu / (1.0 - self.nu)
        return self.shape * rho

    @property
    def variance(self):
        return cell_central_moment(self, 2)


# ---------------------------------------------------------------------------
# exact central moments via the family recurrences


@lru_cache(maxsize=None)
def _poisson_central_polys(kmax):
    """mu_k as polynomials in lambda: mu_{v+1} = lam*(dmu_v + v*mu_{v-1})."""
    polys = [[1.0], [0.0]]
    for v in range(1, kmax):
        nxt = poly_add(poly_diff(polys[v]), poly_scale(polys[v - 1], float(v)))
        polys.append([0.0] + nxt)  # multiply by lambda
    return polys


@lru_cache(maxsize=None)
def _binomial_central_polys(omega, kmax):
    """mu_k as polynomials in p: mu_k = pq*(dmu_{k-1}/dp + (k-1)*w*mu_{k-2})."""
    pq = [0.0, 1.0, -1.0]  # p - p^2
    polys = [[1.0], [0.0]]
    for k in range(2, kmax + 1):
        inner = poly_add(
            poly_diff(polys[k - 1]), poly_scale(polys[k - 2], (k - 1) * omega)
        )
        polys.append(poly_mul(pq, inner))
    return polys


@lru_cache(maxsize=None)
def _nb_unit_cumulant_polys(kmax):
    """Cumulants of NB(1, .) as polynomials in rho = p/(1-p).

    kappa_1 = rho, kappa_{r+1} = rho(1+rho) d kappa_r / d rho.
    Cumulants of NB(d, .) are d times these.
    """
    rr = [0.0, 1.0, 1.0]  # rho + rho^2
    polys = [[0.0], [0.0, 1.0]]
    for _ in range(1, kmax):
        polys.append(poly_mul(rr, poly_diff(polys[-1])))
    return polys


def cell_central_moment(cell, k):
    """Exact k-th central moment E(xi_m - E xi_m)^k via the family recurrence."""
    if k < 0:
        raise OrderTooHigh("moment order must be >= 0")
    if k > K_MAX:
        raise OrderTooHigh(f"moment order {k} exceeds K_MAX={K_MAX}")
    if k == 0:
        return 1.0
    if k == 1:
        return 0.0
    if cell.family == POISSON:
        return poly_eval(_poisson_central_polys(k)[k], cell.mean)
    if cell.family == BINOMIAL:
        return poly_eval(_binomial_central_polys(int(round(cell.shape)), k)[k], cell.nu)
    rho = cell.nu / (1.0 - cell.nu)
    kappa = [poly_eval(p, rho) * cell.shape for p in _nb_unit_cumulant_polys(k)]
    return cumulants_to_central(kappa)[k]


def cell_cumulants(cell, kmax):
    """Cumulants kappa_1..kappa_kmax of the cell variable."""
    if kmax > K_MAX:
        raise OrderTooHigh(f"order {kmax} exceeds K_MAX={K_MAX}")
    if cell.family == NEGBINOMIAL:
        rho = cell.nu / (1.0 - cell.nu)
        return [poly_eval(p, rho) * cell.shape
                for p in _nb_unit_cumulant_polys(kmax)][1:]
    # derive from central moments (orders here are small)
    central = [cell_central_moment(cell, j) for j in range(kmax + 1)]
    kappa = [0.0, cell.mean]
    for n in range(2, kmax + 1):
        s = central[n]
        for j in range(2, n):
            s -= math.comb(n - 1, j - 1) * kappa[j] * central[n - j]
        kappa.append(s)
    return kappa[1:]


# ---------------------------------------------------------------------------
# supports, pmfs, brute-force oracle, characteristic function


def _frozen(cell):
    if cell.family == POISSON:
        return stats.poisson(cell.mean)
    if cell.family == BINOMIAL:
        return stats.binom(int(round(cell.shape)), cell.nu)
    # our nu is P{failure-ish}: pmf C(d+k-1,k) nu^k (1-nu)^d
    return stats.nbinom(cell.shape, 1.0 - cell.nu)


def cell_support(cell, tail_eps, cap=None):
    """Truncated support [0..x*] with the smallest x* whose upper tail
    P{xi > x*} < tail_eps; stepping starts from mean + 10*sqrt(mean).
    """
    fr = _frozen(cell)
    if cell.family == BINOMIAL:
        hi = int(round(cell.shape))
    else:
        x = int(cell.mean + 10.0 * math.sqrt(max(cell.mean, 1.0))) + 1
        while fr.sf(x) >= tail_eps:
            x += 1
        while x > 0 and fr.sf(x - 1) < tail_eps:
            x -= 1
        hi = x
    if cap is not None:
        hi = min(hi, cap)
    xs = np.arange(hi + 1)
    return xs, fr.pmf(xs)


def cell_pmf(cell, x):
    return _frozen(cell).pmf(x)


def cell_central_moment_brute(cell, k, tail_eps=1e-12):
    """Independent truncated-sum oracle for cell_central_moment.

    The support is truncated where the omitted probability is below
    tail_eps, then extended until the omitted moment mass itself is
    negligible (high powers amplify the tail).
    """
    if not 0 < tail_eps <= 1e-6:
        raise ValueError("tail_eps must lie in (0, 1e-6]")
    xs, w = cell_support(cell, tail_eps)
    acc = float(np.sum(w * (xs - cell.mean) ** k))
    if cell.family == BINOMIAL:
        return acc
    fr = _frozen(cell)
    x = int(xs[-1]) + 1
    quiet = 0
    while quiet < 8:
        term = fr.pmf(x) * (x - cell.mean) ** k
        acc += term
        quiet = quiet + 1 if abs(term) < tail_eps * max(1.0, abs(acc)) else 0
        x += 1
    return acc


def cell_charfn(cell, tau):
    """Exact characteristic function E exp(i tau xi_m); tau may be an array."""
    tau = np.asarray(tau, dtype=float)
    e = np.exp(1j * tau)
    if cell.family == POISSON:
        out = np.exp(cell.mean * (e - 1.0))
    elif cell.family == BINOMIAL:
        out = (1.0 - cell.nu + cell.nu * e) ** int(round(cell.shape))
    else:
        out = ((1.0 - cell.nu) / (1.0 - cell.nu * e)) ** cell.shape
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# the urn model


@dataclass(frozen=True)
class GumSpec:
    """A generalized urn model: independent integer cells conditioned on
    their total equaling n."""

    cells: tuple
    n: int
    A_N: float = field(init=False)
    B_N2: float = field(init=False)

    def __post_init__(self):
        fams = {c.family for c in self.cells}
        if len(fams) != 1:
            raise ValueError("all cells must share one family")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.family == BINOMIAL:
            omega_total = sum(int(round(c.shape)) for c in self.cells)
            if self.n > omega_total:
                raise InfeasibleTotal(
                    f"n={self.n} exceeds total stratum size {omega_total}")
        a = sum(c.mean for c in self.cells)
        b2 = sum(cell_central_moment(c, 2) for c in self.cells)
        object.__setattr__(self, "A_N", a)
        object.__setattr__(self, "B_N2", b2)

    @property
    def family(self):
        return self.cells[0].family

    @property
    def N(self):
        return len(self.cells)

    @property
    def B_N(self):
        return math.sqrt(self.B_N2)

    @property
    def x_N(self):
        return (self.n - self.A_N) / self.B_N

    def to_json(self):
        return {
            "family": self.family,
            "shapes": [c.shape for c in self.cells],
            "nu": self.cells[0].nu,
            "n": self.n,
        }


def calibrate(family, shapes, n):
    """Build a GumSpec whose nu makes A_N = n exactly (hence x_N = 0).

    Poisson: nu = n (cell means n*p_m); binomial: nu = n / Omega_N;
    negative binomial: nu = n / (n + D_1N).
    """
    shapes = [float(s) for s in shapes]
    if any(s <= 0 for s in shapes):
        raise NonpositiveShape("all shapes must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if family == POISSON:
        total = sum(shapes)
        if abs(total - 1.0) > 1e-9:
            warnings.warn(
                f"Poisson probability vector sums to {total!r}; renormalizing",
                stacklevel=2,
            )
        shapes = [s / total for s in shapes]
        nu = float(n)
    elif family == BINOMIAL:
        omega_total = sum(int(round(s)) for s in shapes)
        if n > omega_total:
            raise InfeasibleTotal(f"n={n} > sum(omega)={omega_total}")
        nu = n / omega_total
    elif family == NEGBINOMIAL:
        d_total = sum(shapes)
        nu = n / (n + d_total)
    else:
        raise ValueError(f"unknown family {family!r}")
    cells = tuple(CellLaw(family, s, nu) for s in shapes)
    return GumSpec(cells=cells, n=int(n))


def gum_from_json(doc):
    """Construct a GumSpec from {"family": .., "shapes": [..], "n": ..}.

    When "nu" is present it is used as-is; otherwise the model is calibrated.
    """
    family = doc["family"]
    shapes = doc["shapes"]
    n = int(doc["n"])
    if "nu" in doc:
        cells = tuple(CellLaw(family, float(s), float(doc["nu"])) for s in shapes)
        return GumSpec(cells=cells, n=n)
    return calibrate(family, shapes, n)
