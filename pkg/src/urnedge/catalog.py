"""Closed-form parameter lists for the three classical applications:
the chi-square statistic on a multinomial scheme, the sample sum drawn
without replacement from a stratified population, and the Dixon two-sample
spacing statistic.

Each evaluator returns both the published formulas evaluated verbatim and,
where the published display disagrees with the generic moment engine, a
reconciled engine-convention value with the discrepancy flagged.  The
generic engine is ground truth; cross_check() asserts the unflagged fields
and reports the flagged ones without asserting them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleTotal, MismatchBeyondTolerance
from .kernels import IncrementLaw


@dataclass(frozen=True)
class FieldValue:
    """One closed-form quantity: the engine-convention value used for
    comparison, the verbatim published value, and a flag explaining any
    deliberate divergence between the two."""

    value: float
    printed: float
    flag: str = ""  # empty = must match the engine

    @classmethod
    def ok(cls, v):
        return cls(value=float(v), printed=float(v))


def _y_raw_moments(law):
    """Raw moments m_0..m_4 of a finite discrete law (catalog helper)."""
    if not isinstance(law, IncrementLaw):
        law = IncrementLaw(tuple(law[0]), tuple(law[1]))
    return law.raw_moments(4)


# ---------------------------------------------------------------------------
# chi-square on the multinomial scheme


@dataclass(frozen=True)
class ChiSqParams:
    n: int
    p: tuple
    power_sums: dict
    fields: dict

    def to_json(self):
        return {
            "n": self.n,
            "N": len(self.p),
            "power_sums": {str(k): v for k, v in self.power_sums.items()},
            "fields": {k: {"value": f.value, "printed": f.printed,
                           "flag": f.flag}
                       for k, f in self.fields.items()},
        }


def chisq_closed_form(n, p):
    """Closed-form centering and normalized moments of X^2 = sum eta_m^2
    under the multinomial scheme with cell probabilities p.

    The published third/fourth-order coefficients are retained verbatim but
    flagged: they disagree with the generic engine by more than any global
    convention factor (checked numerically), so they are reported, never
    asserted.  alpha_12 needs a factor N to land in the engine convention.
    """
    p = np.asarray(p, dtype=float)
    N = len(p)
    lam = n / N
    P = {i: float(np.sum(p**i)) for i in range(2, 7)}
    sh2 = 2 * n * lam * P[2] + 4 * n**2 * lam * (P[3] - P[2] ** 2)
    sh = math.sqrt(sh2)

    a12_printed = 2 * lam * P[2] / sh
    a21 = 4 * math.sqrt(n) * lam * (P[2] + 12 * n * (P[3] - P[2] ** 2)) / sh2
    a30 = n * lam / sh**3 * (
        4 * P[2] + 2 * n * (16 * P[3] - 9 * P[2] ** 2)
        + 8 * n**2 * (4 * P[4] - 9 * P[2] * P[3] + 5 * P[2] ** 3))
    a40 = n * lam / sh**4 * (
        8 * P[2] + n * (164 * P[2] ** 2 - 17 * P[3])
        + n**2 * (636 * P[4] - 768 * P[2] * P[3] + 192 * P[2] ** 3)
        + n**3 * (448 * P[5] - 1120 * P[2] * P[4]
                  + 912 * P[2] ** 2 * P[3] - 240 * P[2] ** 4)
        + 48 * n**4 * (P[6] - 4 * P[2] * P[5] + 6 * P[2] ** 2 * P[4]
                       - 4 * P[2] ** 3 * P[3] + P[2] ** 5))
    a22 = (lam * sh2) ** -1 * lam * (
        8 * n * P[2] + 2 * n**2 * (19 * P[3] - 14 * P[2] ** 2)
        + 12 * n**3 * (P[4] - 2 * P[2] * P[3] + P[2] ** 3) - 1)
    s2020 = n * lam / sh**4 * (
        3 * P[2] - 2 * n * P[3] + 4 * N**2 * P[4]
        + 16 * N**3 * (P[5] - 2 * P[4] * P[2] + P[3] * P[2])
        + 16 * N**4 * (P[6] - 4 * P[2] * P[5] + 6 * P[4] * P[2] ** 2
                       - 4 * P[3] * P[2] ** 3 + P[2] ** 5))
    mixed = (lam * sh2) ** -1 * (
        2 * n**2 * lam * P[3]
        + 2 * n**3 * lam * (2 * P[4] - 6 * P[3] * P[2] + 3 * P[2] ** 3))

    fields = {
        "Lambda": FieldValue.ok(n * (1 + n * P[2])),
        "sigma2": FieldValue.ok(N * sh2),
        "alpha_12": FieldValue(
            value=N * a12_printed, printed=a12_printed,
            flag="published value is the engine convention divided by N"),
        "alpha_21": FieldValue(
            value=a21, printed=a21,
            flag="published display disagrees with the engine by a "
                 "p-dependent amount; reported only"),
        "alpha_30": FieldValue(
            value=a30, printed=a30,
            flag="published cubic coefficients disagree with the engine "
                 "(16P3-9P2^2 block); reported only"),
        "alpha_40": FieldValue(
            value=a40, printed=a40,
            flag="published quartic coefficients disagree with the engine; "
                 "reported only"),
        "alpha_22": FieldValue(
            value=a22, printed=a22,
            flag="published display disagrees with the engine; reported "
                 "only"),
        "sum_a20_sq": FieldValue(
            value=s2020, printed=s2020,
            flag="published display mixes N- and n-powers; reported only"),
        "sum_mixed": FieldValue(
            value=mixed, printed=mixed,
            flag="published display disagrees with the engine (sign); "
                 "reported only"),
    }
    return ChiSqParams(n=int(n), p=tuple(float(x) for x in p),
                       power_sums=P, fields=fields)


# ---------------------------------------------------------------------------
# sample sum without replacement


@dataclass(frozen=True)
class SampleSumParams:
    omega: tuple
    n: int
    p: float
    fields: dict
    beta_bound: float

    def to_json(self):
        return {
            "omega": list(self.omega),
            "n": self.n,
            "p": self.p,
            "beta_3_bound": self.beta_bound,
            "fields": {k: {"value": f.value, "printed": f.printed,
                           "flag": f.flag}
                       for k, f in self.fields.items()},
        }


def samplesum_closed_form(omega, y_moments, n, y_abs3=None):
    """Closed-form quantities of the sample sum of a without-replacement
    sample of size n from strata of sizes omega, whose elements are i.i.d.
    within stratum m with raw moments y_moments[m] = [1, m1, m2, m3, m4].

    y_abs3[m] = E|Y_m - gamma|^3, when supplied, feeds the upper bound on
    beta_3 (an inequality, labeled as such).  The published alpha_21 and
    alpha_03 carry a sqrt(N) convention factor (and a sign, for alpha_03)
    relative to the engine; alpha_22 and the per-cell sums carry a factor N.
    """
    omega = np.asarray(omega, dtype=float)
    N = len(omega)
    Om = float(omega.sum())
    if n > Om:
        raise InfeasibleTotal(f"sample size {n} exceeds population {Om}")
    raw = np.asarray([list(m) for m in y_moments], dtype=float)
    p = n / Om
    q = 1.0 - p
    gamma = float(np.sum(omega * raw[:, 1])) / Om
    # central moments of Y_m about gamma
    a = {}
    for i in range(1, 5):
        acc = np.zeros(N)
        for l in range(i + 1):
            acc += math.comb(i, l) * raw[:, l] * (-gamma) ** (i - l)
        a[i] = acc
    S = float(np.sum(omega * (a[2] - p * a[1] ** 2)))
    sigma2 = p * S
    rt_n = math.sqrt(N)

    a21_printed = (math.sqrt(q / n)
                   * float(np.sum(omega * (a[2] - 2 * p * a[1] ** 2))) / S)
    a03_printed = (1.0 - 2.0 * q) / math.sqrt(n * q)
    a22_printed = float(np.sum(omega * (
        a[2] * (1.0 + (omega - 2.0) * p)
        - a[1] ** 2 * (omega - 2.0) * p * (1.0 - 3.0 * q)))) / (Om * p * S)
    s1111_printed = q * float(np.sum(omega**2 * a[1] ** 2)) / (Om * S)
    s2002_printed = float(np.sum(omega**2 * (a[2] - p * a[1] ** 2))) / (Om * S)
    a30_printed = (float(np.sum(omega * (
        a[3] - 3 * p * a[1] * a[2] - 2 * p**2 * a[1] ** 3)))
        * (p ** (2.0 / 3.0) * S) ** -1.5)
    a40_printed = (float(np.sum(omega * (
        a[4] - 4 * p * a[1] * a[3] + 3 * (omega - 1.0) * p * a[2] ** 2
        - 6 * (omega - 2.0) * p**2 * a[1] ** 2 * a[2]
        - 3 * (3.0 * omega - 2.0) * p**3 * a[1] ** 4)))
        * (math.sqrt(p) * S) ** -2)

    if y_abs3 is not None:
        delta = 1.0
        beta_bound = (2 ** (2 + delta) * p * (1 + p ** (1 + delta))
                      / sigma2 ** ((2 + delta) / 2.0)
                      * float(np.sum(omega ** (2 + delta)
                                     * np.asarray(y_abs3, dtype=float))))
    else:
        beta_bound = math.nan

    fields = {
        "gamma": FieldValue.ok(gamma),
        "sigma2": FieldValue.ok(sigma2),
        "alpha_12": FieldValue.ok(0.0),
        "alpha_21": FieldValue(
            value=rt_n * a21_printed, printed=a21_printed,
            flag="published value is the engine convention divided by "
                 "sqrt(N)"),
        "alpha_03": FieldValue(
            value=-rt_n * a03_printed, printed=a03_printed,
            flag="published value is minus the engine convention divided "
                 "by sqrt(N)"),
        "alpha_22": FieldValue(
            value=N * a22_printed, printed=a22_printed,
            flag="published value is the engine convention divided by N"),
        "sum_a11_sq": FieldValue(
            value=N * s1111_printed, printed=s1111_printed,
            flag="published per-cell sum is the engine convention divided "
                 "by N"),
        "sum_a20_a02": FieldValue(
            value=N * s2002_printed, printed=s2002_printed,
            flag="published per-cell sum is the engine convention divided "
                 "by N"),
        "alpha_30": FieldValue(
            value=a30_printed, printed=a30_printed,
            flag="published p-exponent in the denominator does not "
                 "reconcile with the engine; reported only"),
        "alpha_40": FieldValue(
            value=a40_printed, printed=a40_printed,
            flag="published display disagrees with the engine; reported "
                 "only"),
    }
    return SampleSumParams(omega=tuple(float(w) for w in omega), n=int(n),
                           p=p, fields=fields, beta_bound=beta_bound)


# ---------------------------------------------------------------------------
# Dixon spacing statistic


@dataclass(frozen=True)
class DixonParams:
    M: int
    n: int
    k: int
    rho: float
    N: int
    leftover: int
    fields: dict

    def to_json(self):
        return {
            "M": self.M, "n": self.n, "k": self.k, "rho": self.rho,
            "N": self.N, "leftover": self.leftover,
            "fields": {kk: {"value": f.value, "printed": f.printed,
                            "flag": f.flag}
                       for kk, f in self.fields.items()},
        }


def dixon_closed_form(M, n, k):
    """Closed-form centering of the Dixon statistic sum eta_{m,k}^2 on
    N = floor(M/k) spacing blocks of step k; rho = n/M.

    Three published values are reconciled against the engine: Lambda needs
    an overall factor rho, and sigma^2 and alpha_12 need (1+k) in place of
    the published (1+2k).  The published alpha_30 ratio is kept verbatim
    and only reported.
    """
    if min(M, n, k) < 1:
        raise ValueError("M, n, k must all be >= 1")
    N = M // k
    leftover = M - N * k
    rho = n / M
    lam_printed = M * (1.0 + (1.0 + k) * rho)
    sig_printed = 2.0 * M * (1.0 + 2.0 * k) * rho**2 * (1.0 + rho) ** 2
    a12_printed = math.sqrt(2.0) * (k + 1.0) / math.sqrt(k * (1.0 + 2.0 * k))
    a30_printed = (
        8.0 * k**2 * rho**3 * (1.0 + rho) ** 3
        + k * (1.0 + rho) ** 2 * (
            19.0 + 76.0 * rho * (1.0 + rho)
            + 2.0 * (1.0 + rho) ** 2
            * (15.0 - 13.0 * rho + 16.0 * rho**2 * (1.0 + rho)))
    ) / (2.0 * math.sqrt(2.0) * (k * (1.0 + 2.0 * k)) ** 1.5
         * rho**3 * (1.0 + rho) ** 3)

    fields = {
        "Lambda": FieldValue(
            value=rho * lam_printed, printed=lam_printed,
            flag="published value is the engine convention divided by rho"),
        "gamma": FieldValue.ok(1.0 + 2.0 * (1.0 + k) * rho),
        "sigma2": FieldValue(
            value=2.0 * M * (1.0 + k) * rho**2 * (1.0 + rho) ** 2,
            printed=sig_printed,
            flag="published (1+2k) reconciles to (1+k) against the engine"),
        "alpha_12": FieldValue(
            value=math.sqrt(2.0) * (k + 1.0) / math.sqrt(k * (1.0 + k)),
            printed=a12_printed,
            flag="published k(1+2k) reconciles to k(1+k) against the "
                 "engine"),
        "alpha_30": FieldValue(
            value=a30_printed, printed=a30_printed,
            flag="published ratio disagrees with the engine; reported only"),
    }
    return DixonParams(M=int(M), n=int(n), k=int(k), rho=rho, N=int(N),
                       leftover=int(leftover), fields=fields)


# ---------------------------------------------------------------------------
# reconciliation against the generic engine


#: which engine quantity each catalog field corresponds to
_ENGINE_MAP = {
    "Lambda": lambda c: c.lam,
    "gamma": lambda c: c.gamma,
    "sigma2": lambda c: c.sigma2,
    "alpha_12": lambda c: c.joint_alpha(1, 2),
    "alpha_21": lambda c: c.joint_alpha(2, 1),
    "alpha_03": lambda c: c.joint_alpha(0, 3),
    "alpha_22": lambda c: c.joint_alpha(2, 2),
    "alpha_30": lambda c: c.joint_alpha(3, 0),
    "alpha_40": lambda c: c.joint_alpha(4, 0),
    "sum_a20_sq": lambda c: c.percell_hat_sum(2, 0, 2, 0),
    "sum_a11_sq": lambda c: c.percell_hat_sum(1, 1, 1, 1),
    "sum_a20_a02": lambda c: c.percell_hat_sum(2, 0, 0, 2),
    "sum_mixed": lambda c: (4.0 * c.percell_hat_sum(1, 1, 1, 1)
                            + 2.0 * c.percell_hat_sum(2, 0, 0, 2)),
}

#: flags containing this marker are report-only (no assertion possible)
_REPORT_ONLY = "reported only"


@dataclass(frozen=True)
class DiffReport:
    rows: tuple  # (field, closed_form, engine, rel_diff, flag, asserted)

    def to_json(self):
        return [
            {"field": f, "closed_form": cf, "engine": en, "rel_diff": rd,
             "flag": fl, "asserted": asserted}
            for f, cf, en, rd, fl, asserted in self.rows
        ]

    def max_asserted_diff(self):
        diffs = [rd for *_, rd, _, asserted in self.rows if asserted]
        return max(diffs) if diffs else 0.0


def cross_check(params, centered, tol=1e-9):
    """Field-by-field comparison of closed-form values with the generic
    engine on the same instance.  Fields whose flag marks them report-only
    are listed with their deviation; every other field must agree within
    tol relative, else MismatchBeyondTolerance."""
    rows = []
    failures = []
    for name, fv in params.fields.items():
        engine = float(_ENGINE_MAP[name](centered))
        scale = max(abs(engine), abs(fv.value))
        # fall back to absolute difference when both sides are ~0
        rel = abs(fv.value - engine) / scale if scale > 1e-12 else abs(
            fv.value - engine)
        asserted = _REPORT_ONLY not in fv.flag
        rows.append((name, fv.value, engine, rel, fv.flag, asserted))
        if asserted and rel > tol:
            failures.append(f"{name}: closed={fv.value!r} engine={engine!r} "
                            f"rel={rel:.3e}")
    if failures:
        raise MismatchBeyondTolerance("; ".join(failures))
    return DiffReport(rows=tuple(rows))
