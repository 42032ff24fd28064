"""Applicability gates for the expansions: normalized absolute moments,
the trigonometric separation functional M_N, Lindeberg-type functionals,
and the explicit ingredients of the Berry-Esseen-type bounds.

All bounds are reported "modulo constants": the absolute constants in the
theorems are not explicit, so the report carries raw ingredient values and
never claims a numeric bound on the true error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderTooHigh
from .kernels import MOMENT_ORDER
from .models import cell_charfn

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def norm_moments(centered, j):
    """Normalized absolute moments beta_j = sum E|g_m|^j / sigma_N^j and
    kappa_j = sum E|xi_m - E xi_m|^j / B_N^j; j may be fractional."""
    if not 2 <= j <= MOMENT_ORDER:
        raise OrderTooHigh(f"j={j} outside [2, {MOMENT_ORDER}]")
    beta = centered.abs_g_moment_total(j) / centered.sigma**j
    kappa = centered.abs_xi_moment_total(j) / centered.B_N**j
    return {"beta": beta, "kappa": kappa}


def _charfn_gap(gum, taus):
    """sum_m (1 - |E exp(i tau xi_m)|^2) evaluated on an array of taus."""
    taus = np.asarray(taus, dtype=float)
    acc = np.zeros_like(taus)
    for cell in gum.cells:
        acc += 1.0 - np.abs(cell_charfn(cell, taus)) ** 2
    return acc


def m_inf(gum, T, grid_points=1024):
    """inf over tau in [T, pi] of sum_m (1 - |E e^{i tau xi_m}|^2);
    +inf when the window is empty (T > pi).

    Grid scan followed by golden-section refinement around the grid
    minimizer, to relative tolerance 1e-8.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if grid_points < 512:
        raise ValueError("grid_points must be >= 512")
    if T > math.pi:
        return math.inf
    taus = np.linspace(T, math.pi, grid_points)
    vals = _charfn_gap(gum, taus)
    i = int(np.argmin(vals))
    lo = taus[max(i - 1, 0)]
    hi = taus[min(i + 1, grid_points - 1)]
    # golden-section descent on the bracket
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = float(_charfn_gap(gum, [c])[0])
    fd = float(_charfn_gap(gum, [d])[0])
    while (b - a) > 1e-8 * max(abs(a), abs(b), 1.0):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = float(_charfn_gap(gum, [c])[0])
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = float(_charfn_gap(gum, [d])[0])
    best = min(float(vals[i]), fc, fd)
    return best


@dataclass
class BoundReport:
    """Ingredients of the error bounds; every entry is nonnegative."""

    s: int
    delta: float
    eps: float
    beta: dict
    kappa: dict
    m_at_upsilon_arg: float
    m_at_e_arg: float
    upsilon: float
    e_delta: float
    t_gate: float
    lindeberg: dict
    thm32_rhs: float
    thm33_rhs_partial: float
    omitted: tuple = ("oscillatory integral term of the s-order bound",)

    def to_json(self):
        def clean(v):
            return "inf" if v == math.inf else v
        return {
            "s": self.s,
            "delta": self.delta,
            "eps": self.eps,
            "beta": {str(k): v for k, v in self.beta.items()},
            "kappa": {str(k): v for k, v in self.kappa.items()},
            "M_at_upsilon_arg": clean(self.m_at_upsilon_arg),
            "M_at_E_arg": clean(self.m_at_e_arg),
            "upsilon": self.upsilon,
            "E_delta": self.e_delta,
            "T_gate": self.t_gate,
            "lindeberg": self.lindeberg,
            "thm32_rhs": self.thm32_rhs,
            "thm33_rhs_partial": self.thm33_rhs_partial,
            "omitted": list(self.omitted),
        }

    def rows(self):
        """Two-column rows for the CLI table."""
        out = []
        doc = self.to_json()
        for key in ("s", "delta", "eps"):
            out.append((key, doc[key]))
        for j, v in sorted(self.beta.items()):
            out.append((f"beta_{j}", v))
        for j, v in sorted(self.kappa.items()):
            out.append((f"kappa_{j}", v))
        out += [
            ("M_at_upsilon_arg", doc["M_at_upsilon_arg"]),
            ("M_at_E_arg", doc["M_at_E_arg"]),
            ("upsilon", self.upsilon),
            ("E_delta", self.e_delta),
            ("T_gate", self.t_gate),
        ]
        for k, v in self.lindeberg.items():
            out.append((k, v))
        out += [
            ("thm32_rhs", self.thm32_rhs),
            ("thm33_rhs_partial", self.thm33_rhs_partial),
            ("omitted", "; ".join(self.omitted)),
        ]
        return out


def gates(centered, s, delta, eps=1.0, grid_points=1024):
    """Assemble the BoundReport for a centered statistic.

    The s-order bound's right-hand side is reported as its moment/charfn
    part only; the oscillatory integral contribution is out of scope and
    flagged as omitted.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if s not in (3, 4, 5):
        raise ValueError("s must be 3, 4 or 5")
    gum = centered.gum
    b_n = centered.B_N
    orders = sorted({2, 3, float(s), 2.0 + delta})
    beta = {}
    kappa = {}
    for j in orders:
        nm = norm_moments(centered, j)
        beta[j] = nm["beta"]
        kappa[j] = nm["kappa"]

    t_ups = 0.3 / (b_n * kappa[3])
    m_ups = m_inf(gum, t_ups, grid_points)
    upsilon = (beta[float(s)] + kappa[float(s)]
               + b_n**2 * math.exp(-m_ups / 8.0))

    t_e = 0.3 / (b_n * kappa[2.0 + delta])
    m_e = m_inf(gum, t_e, grid_points)
    if m_e == math.inf:
        e_delta = 0.0
    else:
        e_delta = (1.0 / math.sqrt(m_e)
                   + min(b_n, math.sqrt(centered.N)) / m_e)
    t_gate = min(1.0 / beta[3],
                 1.0 / e_delta if e_delta > 0 else math.inf)
    lind = centered.lindeberg(eps)
    thm32 = beta[2.0 + delta] + kappa[2.0 + delta] + e_delta
    return BoundReport(
        s=s, delta=delta, eps=eps, beta=beta, kappa=kappa,
        m_at_upsilon_arg=m_ups, m_at_e_arg=m_e, upsilon=upsilon,
        e_delta=e_delta, t_gate=t_gate, lindeberg=lind,
        thm32_rhs=thm32, thm33_rhs_partial=upsilon)
