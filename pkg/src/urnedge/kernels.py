"""Kernel functions f_m of a decomposable statistic.

Deterministic kernels are value tables (or the Power / Indicator builtins);
the CompoundSum kernel attaches to each cell a finite increment law Y_m and
means f_m(j) = Y_1 + ... + Y_j (a distribution-valued kernel).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import SupportTooShort
from .polynomials import cumulants_to_raw

MOMENT_ORDER = 6


@dataclass(frozen=True)
class IncrementLaw:
    """Finite discrete law of one compound-sum increment."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if s.shape != p.shape or s.ndim != 1 or len(s) == 0:
            raise ValueError("support and probs must be equal-length vectors")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("increment probabilities must be a proper PMF")

    def raw_moments(self, kmax=MOMENT_ORDER):
        s = np.asarray(self.support)
        p = np.asarray(self.probs)
        return [float(np.sum(p * s**k)) for k in range(kmax + 1)]

    def cumulants(self, kmax=MOMENT_ORDER):
        raw = self.raw_moments(kmax)
        kappa = [0.0] * (kmax + 1)
        for n in range(1, kmax + 1):
            s = raw[n]
            for j in range(1, n):
                s -= comb(n - 1, j - 1) * kappa[j] * raw[n - j]
            kappa[n] = s
        return kappa

    def charfn(self, t):
        s = np.asarray(self.support)
        p = np.asarray(self.probs)
        t = np.asarray(t, dtype=float)
        return np.sum(p * np.exp(1j * np.multiply.outer(t, s)), axis=-1)

    def sum_raw_moments(self, j, kmax=MOMENT_ORDER):
        """Raw moments of Y_1 + .. + Y_j (cumulants scale linearly)."""
        kappa = [k * j for k in self.cumulants(kmax)]
        return cumulants_to_raw(kappa)


class Kernel:
    """Base class; deterministic kernels implement values()."""

    is_random = False

    def values(self, m, xs):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerKernel(Kernel):
    k: int = 2

    def values(self, m, xs):
        return np.asarray(xs, dtype=float) ** self.k

    def to_json(self):
        return {"builtin": "power", "k": self.k}


@dataclass(frozen=True)
class IndicatorKernel(Kernel):
    r: int = 0

    def values(self, m, xs):
        return (np.asarray(xs) == self.r).astype(float)

    def to_json(self):
        return {"builtin": "indicator", "r": self.r}


class TableKernel(Kernel):
    """Per-cell dense value tables indexed from 0; a table shorter than the
    truncated cell support is an error, never zero-filled."""

    def __init__(self, tables):
        self.tables = [np.asarray(t, dtype=float) for t in tables]

    def values(self, m, xs):
        xs = np.asarray(xs)
        tab = self.tables[m]
        if xs[-1] >= len(tab):
            raise SupportTooShort(
                f"kernel table for cell {m} has {len(tab)} entries, "
                f"support needs index {int(xs[-1])}")
        return tab[xs]

    def to_json(self):
        return {"tables": [t.tolist() for t in self.tables]}


class CompoundSumKernel(Kernel):
    """f_m(j) = sum of j i.i.d. increments drawn from the cell's law."""

    is_random = True

    def __init__(self, laws):
        self.laws = [
            law if isinstance(law, IncrementLaw)
            else IncrementLaw(tuple(law[0]), tuple(law[1]))
            for law in laws
        ]

    def values(self, m, xs):
        raise TypeError("CompoundSum kernel values are distributions")

    def to_json(self):
        return {"compound": [
            {"support": list(l.support), "probs": list(l.probs)}
            for l in self.laws
        ]}


def kernel_from_json(doc):
    if "builtin" in doc:
        if doc["builtin"] == "power":
            return PowerKernel(int(doc["k"]))
        if doc["builtin"] == "indicator":
            return IndicatorKernel(int(doc["r"]))
        raise ValueError(f"unknown builtin kernel {doc['builtin']!r}")
    if "tables" in doc:
        return TableKernel(doc["tables"])
    if "compound" in doc:
        return CompoundSumKernel(
            [IncrementLaw(tuple(d["support"]), tuple(d["probs"]))
             for d in doc["compound"]])
    raise ValueError("unrecognized kernel document")
