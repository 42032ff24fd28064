"""Ground-truth machinery: exact conditional distribution of the statistic
by dynamic-programming convolution, the local probability of the total, the
conditional characteristic function by quadrature, and direct samplers for
the three urn schemes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .centering import _compound_dist, float_gcd
from .errors import (
    NonRepresentableValues,
    QuadratureNotConverged,
    StateBudgetExceeded,
)
from .kernels import CompoundSumKernel
from .models import BINOMIAL, NEGBINOMIAL, POISSON, cell_support

DEFAULT_BUDGET = 10**7

#: Fixed number of sampler chunks; the merge is chunk-ordered, so the result
#: depends only on the seed, never on how many workers ran the chunks.
SAMPLE_CHUNKS = 16


@dataclass
class ExactDist:
    """A discrete distribution on a (possibly lattice) value set."""

    values: np.ndarray
    probs: np.ndarray
    z0: float
    h: float
    total_prob_check: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("values must be strictly increasing")
        if np.any(self.probs < 0):
            raise ValueError("negative probability")

    def cdf(self, z):
        """P{value <= z}; z may be an array."""
        idx = np.searchsorted(self.values, np.asarray(z, dtype=float),
                              side="right")
        cum = np.concatenate([[0.0], np.cumsum(self.probs)])
        return cum[idx]

    def mean(self):
        return float(np.sum(self.values * self.probs))

    def variance(self):
        mu = self.mean()
        return float(np.sum((self.values - mu) ** 2 * self.probs))

    def to_json(self):
        return {
            "z0": self.z0,
            "h": self.h,
            "values": [[float(v), float(p)]
                       for v, p in zip(self.values, self.probs)],
            "total_prob_check": self.total_prob_check,
            "meta": self.meta,
        }


class JointGrid:
    """DP state over (value-lattice index, accumulated total k <= n).

    Each k-slice is a contiguous probability array with an integer offset on
    the value lattice; mass pruned at k > n is tracked, so conservation can
    be audited at every stage.
    """

    def __init__(self, n, q_v, budget=DEFAULT_BUDGET):
        self.n = n
        self.q_v = q_v
        self.budget = budget
        self.slices = {0: (0, np.array([1.0]))}
        self.pruned_mass = 0.0
        self.stage_mass = 1.0  # product of per-cell retained masses

    def size(self):
        return sum(len(arr) for _, arr in self.slices.values())

    def mass_check(self):
        """Retained + pruned mass, to compare against the truncation product."""
        total = sum(float(arr.sum()) for _, arr in self.slices.values())
        return total + self.pruned_mass

    def convolve_cell(self, xs, weights, shifts):
        """Fold in one cell.

        shifts[r] is either an integer lattice shift (deterministic kernel)
        or an (offset, array) pair giving the conditional value distribution
        on the lattice (compound kernel), for frequency xs[r].
        """
        new = {}
        for k, (off, arr) in self.slices.items():
            for x, wx, sh in zip(xs, weights, shifts):
                k2 = k + int(x)
                if k2 > self.n:
                    self.pruned_mass += wx * float(arr.sum())
                    continue
                if isinstance(sh, tuple):
                    coff, carr = sh
                    _accumulate(new, k2, off + coff,
                                wx * np.convolve(arr, carr))
                else:
                    _accumulate(new, k2, off + sh, wx * arr)
        self.slices = new
        self.stage_mass *= float(np.sum(weights))
        size = self.size()
        if size > self.budget:
            raise StateBudgetExceeded(size, self.budget)


def _accumulate(slices, k, off, arr):
    if k not in slices:
        slices[k] = (off, arr.copy())
        return
    off0, arr0 = slices[k]
    lo = min(off0, off)
    hi = max(off0 + len(arr0), off + len(arr))
    if lo == off0 and hi == off0 + len(arr0):
        arr0[off - off0: off - off0 + len(arr)] += arr
        return
    merged = np.zeros(hi - lo)
    merged[off0 - lo: off0 - lo + len(arr0)] = arr0
    merged[off - lo: off - lo + len(arr)] += arr
    slices[k] = (lo, merged)


def _value_lattice(all_values, q_v):
    """Quantization step and the index map check for a set of real values."""
    vals = np.unique(np.asarray(all_values, dtype=float))
    scale = max(1.0, float(np.max(np.abs(vals))) if len(vals) else 1.0)
    if q_v is None:
        q = float_gcd(np.abs(vals[vals != 0.0]))
        if q == 0.0:
            q = 1.0
        if q < 1e-9 * scale:
            raise NonRepresentableValues(
                "kernel values are not commensurable; supply q_v")
    else:
        q = float(q_v)
        if q <= 0:
            raise ValueError("q_v must be positive")
    idx = np.rint(vals / q)
    if q_v is None and np.max(np.abs(vals - idx * q)) > 1e-9 * scale:
        raise NonRepresentableValues(
            f"kernel values do not sit on the q_v={q} lattice")
    return q


def local_prob(gum, tail_eps=1e-12):
    """P{xi_1 + ... + xi_N = n} by 1-D convolution of the truncated PMFs."""
    n = gum.n
    arr = np.array([1.0])
    for cell in gum.cells:
        xs, w = cell_support(cell, tail_eps, cap=n)
        arr = np.convolve(arr, w)[: n + 1]
    return float(arr[n]) if len(arr) > n else 0.0


def exact_pmf(gum, kernel, tail_eps=1e-12, q_v=None, budget=DEFAULT_BUDGET):
    """Exact conditional law of the statistic by sequential convolution of
    the per-cell joint laws of (f_m(xi_m), xi_m), pruning totals above n."""
    n = gum.n
    compound = isinstance(kernel, CompoundSumKernel)
    supports = []
    for m, cell in enumerate(gum.cells):
        xs, w = cell_support(cell, tail_eps, cap=n)
        supports.append((xs, w))

    if compound:
        all_incr = np.concatenate(
            [np.asarray(l.support, dtype=float) for l in kernel.laws])
        q = _value_lattice(all_incr, q_v)
    else:
        all_vals = np.concatenate([
            np.asarray(kernel.values(m, xs.astype(int)), dtype=float)
            for m, (xs, w) in enumerate(supports)])
        q = _value_lattice(all_vals, q_v)

    grid = JointGrid(n, q, budget)
    for m, (xs, w) in enumerate(supports):
        if compound:
            law = kernel.laws[m]
            shifts = []
            for x in xs:
                vals, probs = _compound_dist(law, int(x))
                lo = int(np.rint(vals[0] / q))
                shifts.append((lo, probs))
        else:
            fvals = np.asarray(kernel.values(m, xs.astype(int)), dtype=float)
            shifts = np.rint(fvals / q).astype(int)
        grid.convolve_cell(xs, w, shifts)

    if n not in grid.slices:
        raise NonRepresentableValues(
            f"total n={n} unreachable under the truncated supports")
    off, arr = grid.slices[n]
    lp = local_prob(gum, tail_eps)
    check = float(arr.sum()) / lp
    keep = arr > 0.0
    idx = off + np.nonzero(keep)[0]
    probs = arr[keep]
    probs = probs / probs.sum()
    values = idx * q
    if len(idx) > 1:
        h = q * int(np.gcd.reduce(np.diff(idx)))
    else:
        h = 0.0
    return ExactDist(
        values=values, probs=probs, z0=float(values[0]), h=float(h),
        total_prob_check=check,
        meta={"tail_eps": tail_eps, "q_v": q, "dp_size": grid.size(),
              "pruned_mass": grid.pruned_mass, "local_prob": lp})


# ---------------------------------------------------------------------------
# conditional characteristic function by quadrature


def conditional_charfn(centered, t, quad_spec=None):
    """phi_N(t) = E exp{it (R_N - Lambda_N)/sigma_N | total = n} as the ratio
    of two Fourier-type integrals over [-pi, pi], by composite Gauss-Legendre
    quadrature with panel doubling to relative tolerance rtol."""
    spec = {"panels": 16, "nodes": 16, "rtol": 1e-8, "max_doublings": 10}
    if quad_spec:
        spec.update(quad_spec)
    gum = centered.gum
    drift = gum.n - gum.A_N

    def integrand(v, a):
        out = np.exp(-1j * v * drift)
        for m in range(gum.N):
            out = out * centered.cell_joint_charfn(m, a, v)
        return out

    def integrate(a, panels):
        nodes, wts = np.polynomial.legendre.leggauss(spec["nodes"])
        edges = np.linspace(-math.pi, math.pi, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1] - edges[0])
        vs = (mid[:, None] + half * nodes[None, :]).ravel()
        ws = (half * np.broadcast_to(wts, (panels, len(wts)))).ravel()
        return complex(np.sum(ws * integrand(vs, a)))

    def converge(a):
        panels = spec["panels"]
        prev = integrate(a, panels)
        for _ in range(spec["max_doublings"]):
            panels *= 2
            cur = integrate(a, panels)
            if abs(cur - prev) <= spec["rtol"] * max(abs(cur), 1e-300):
                return cur
            prev = cur
        raise QuadratureNotConverged(
            f"no convergence after {panels} panels (t={a * centered.sigma})")

    a = float(t) / centered.sigma
    denom = converge(0.0)
    if t == 0.0:
        return 1.0 + 0.0j
    num = converge(a)
    # num/denom is the charfn of (R_N - Lambda_N - x_N B_N gamma_N)/sigma_N,
    # since sum g_m = R_N - Lambda_N - gamma_N (n - A_N) on the event total=n
    return num / denom


# ---------------------------------------------------------------------------
# samplers


def _sample_counts(gum, reps, rng):
    """Draw reps independent copies of the conditional frequency vector."""
    n_cells = gum.N
    counts = np.zeros((reps, n_cells), dtype=np.int64)
    if gum.family == POISSON:
        # multinomial by sequential binomial thinning
        left = np.full(reps, gum.n, dtype=np.int64)
        rest = float(sum(c.shape for c in gum.cells))
        for m, cell in enumerate(gum.cells):
            frac = cell.shape / rest if rest > 0 else 1.0
            draw = rng.binomial(left, min(frac, 1.0))
            counts[:, m] = draw
            left -= draw
            rest -= cell.shape
        counts[:, -1] += left
    elif gum.family == BINOMIAL:
        left = np.full(reps, gum.n, dtype=np.int64)
        rest = sum(int(round(c.shape)) for c in gum.cells)
        for m, cell in enumerate(gum.cells):
            good = int(round(cell.shape))
            rest -= good
            if rest == 0:
                counts[:, m] = left
                left = np.zeros_like(left)
                continue
            draw = rng.hypergeometric(good, rest, left)
            counts[:, m] = draw
            left -= draw
    elif gum.family == NEGBINOMIAL:
        # sequential urn draws: at step i a cell is chosen with probability
        # (d_m + current count) / (D_N + i)
        d = np.array([c.shape for c in gum.cells])
        total_d = d.sum()
        weights = np.broadcast_to(d, (reps, n_cells)).astype(float).copy()
        for i in range(gum.n):
            u = rng.random(reps) * (total_d + i)
            cum = np.cumsum(weights, axis=1)
            pick = (cum > u[:, None]).argmax(axis=1)
            counts[np.arange(reps), pick] += 1
            weights[np.arange(reps), pick] += 1.0
    else:  # pragma: no cover
        raise ValueError(f"unknown family {gum.family!r}")
    return counts


def _evaluate_kernel(kernel, counts, rng):
    """R_N(eta) for every sampled row; compound kernels draw increments."""
    reps, n_cells = counts.shape
    out = np.zeros(reps)
    if not isinstance(kernel, CompoundSumKernel):
        for m in range(n_cells):
            col = counts[:, m]
            hi = int(col.max())
            table = np.asarray(kernel.values(m, np.arange(hi + 1)),
                               dtype=float)
            out += table[col]
        return out
    for m in range(n_cells):
        col = counts[:, m]
        hi = int(col.max())
        law = kernel.laws[m]
        if hi == 0:
            continue
        support = np.asarray(law.support, dtype=float)
        draws = support[rng.choice(len(support), size=(reps, hi),
                                   p=np.asarray(law.probs, dtype=float))]
        cum = np.concatenate([np.zeros((reps, 1)), np.cumsum(draws, axis=1)],
                             axis=1)
        out += cum[np.arange(reps), col]
    return out


def sample(gum, kernel, reps, seed):
    """Empirical conditional distribution of the statistic from direct draws.

    Reps are split across a fixed number of chunks with independently
    spawned generator streams, so the result depends only on the seed.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    base = reps // SAMPLE_CHUNKS
    sizes = [base + (1 if i < reps % SAMPLE_CHUNKS else 0)
             for i in range(SAMPLE_CHUNKS)]
    streams = np.random.SeedSequence(seed).spawn(SAMPLE_CHUNKS)

    def run_chunk(args):
        size, ss = args
        if size == 0:
            return np.empty(0)
        rng = np.random.default_rng(ss)
        counts = _sample_counts(gum, size, rng)
        return _evaluate_kernel(kernel, counts, rng)

    threads = int(os.environ.get("URNEDGE_THREADS", "0")) or (os.cpu_count() or 1)
    threads = max(1, min(threads, SAMPLE_CHUNKS))
    if threads == 1:
        parts = [run_chunk(a) for a in zip(sizes, streams)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, zip(sizes, streams)))
    vals = np.concatenate(parts)
    uniq, cnt = np.unique(vals, return_counts=True)
    probs = cnt / reps
    if len(uniq) > 1:
        diffs = np.diff(uniq)
        h = float_gcd(diffs)
        base_v = uniq[0]
        on_lattice = (h > 0 and np.max(np.abs(
            uniq - (base_v + np.rint((uniq - base_v) / h) * h))) < 1e-9)
        if not on_lattice:
            h = 0.0
    else:
        h = 0.0
    return ExactDist(
        values=uniq, probs=probs, z0=float(uniq[0]), h=float(h),
        total_prob_check=1.0,
        meta={"seed": int(seed), "reps": int(reps), "empirical": True})
