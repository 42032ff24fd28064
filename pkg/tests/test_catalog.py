"""Closed-form catalogs for the three applications, reconciled against the
generic moment engine on randomized instances."""

import math

import numpy as np
import pytest

from urnedge.catalog import (
    chisq_closed_form,
    cross_check,
    dixon_closed_form,
    samplesum_closed_form,
)
from urnedge.centering import center
from urnedge.errors import InfeasibleTotal, MismatchBeyondTolerance
from urnedge.kernels import CompoundSumKernel, IncrementLaw, PowerKernel
from urnedge.models import calibrate


def random_increment_law(rng):
    # lattice-commensurable supports keep the compound enumeration small
    k = int(rng.integers(2, 4))
    support = 0.5 * np.sort(rng.choice(np.arange(-4, 7), k, replace=False))
    probs = rng.dirichlet(np.ones(k))
    return IncrementLaw(tuple(support), tuple(probs))


class TestChiSq:
    def test_sweep(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            N = int(rng.integers(3, 12))
            p = rng.dirichlet(np.ones(N) * 2.0)
            n = int(rng.integers(N, 4 * N))
            gum = calibrate("poisson", list(p), n)
            cs = center(gum, PowerKernel(2), tail_eps=1e-14)
            params = chisq_closed_form(n, [c.shape for c in gum.cells])
            report = cross_check(params, cs)
            assert report.max_asserted_diff() <= 1e-9
            # flagged fields always appear in the report, never asserted
            flagged = {f for f, *_, fl, asserted in report.rows
                       if not asserted}
            assert "alpha_30" in flagged and "alpha_40" in flagged

    def test_equal_p_values(self):
        n, N = 20, 10
        params = chisq_closed_form(n, [0.1] * N)
        lam = n / N
        assert params.fields["Lambda"].value == pytest.approx(
            n * (1 + n * 0.1))
        want = N * (2 * n * lam * 0.1 + 4 * n**2 * lam * (0.01 - 0.01))
        assert params.fields["sigma2"].value == pytest.approx(want)

    def test_json(self):
        doc = chisq_closed_form(6, [0.5, 0.5]).to_json()
        assert doc["N"] == 2
        assert "alpha_12" in doc["fields"]
        assert doc["fields"]["alpha_30"]["flag"]

    def test_mismatch_detected(self):
        # closed form for one instance against the engine of another
        gum = calibrate("poisson", [0.2, 0.3, 0.5], 6)
        cs = center(gum, PowerKernel(2), tail_eps=1e-14)
        wrong = chisq_closed_form(7, [0.2, 0.3, 0.5])
        with pytest.raises(MismatchBeyondTolerance):
            cross_check(wrong, cs)


class TestSampleSum:
    def test_sweep(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            N = int(rng.integers(2, 8))
            omega = [int(rng.integers(1, 6)) for _ in range(N)]
            n = int(rng.integers(1, sum(omega)))
            laws = [random_increment_law(rng) for _ in range(N)]
            gum = calibrate("binomial", omega, n)
            cs = center(gum, CompoundSumKernel(laws))
            params = samplesum_closed_form(
                omega, [l.raw_moments(4) for l in laws], n)
            report = cross_check(params, cs)
            assert report.max_asserted_diff() <= 1e-9

    def test_alpha12_is_zero(self):
        omega = [2, 3]
        laws = [IncrementLaw((0.0, 1.0), (0.5, 0.5)),
                IncrementLaw((1.0, 2.0), (0.3, 0.7))]
        gum = calibrate("binomial", omega, 3)
        cs = center(gum, CompoundSumKernel(laws))
        params = samplesum_closed_form(
            omega, [l.raw_moments(4) for l in laws], 3)
        assert params.fields["alpha_12"].value == 0.0
        assert cs.joint_alpha(1, 2) == pytest.approx(0.0, abs=1e-10)
        cross_check(params, cs)

    def test_beta_bound_holds(self):
        # the closed-form third-moment bound dominates the engine value
        rng = np.random.default_rng(23)
        from urnedge.diagnostics import norm_moments
        for _ in range(10):
            N = int(rng.integers(2, 6))
            omega = [int(rng.integers(1, 5)) for _ in range(N)]
            n = int(rng.integers(1, sum(omega)))
            laws = [random_increment_law(rng) for _ in range(N)]
            gum = calibrate("binomial", omega, n)
            cs = center(gum, CompoundSumKernel(laws))
            mom = [l.raw_moments(4) for l in laws]
            params0 = samplesum_closed_form(omega, mom, n)
            gamma = params0.fields["gamma"].value
            y_abs3 = [float(np.sum(np.asarray(l.probs)
                                   * np.abs(np.asarray(l.support)
                                            - gamma) ** 3))
                      for l in laws]
            params = samplesum_closed_form(omega, mom, n, y_abs3=y_abs3)
            assert math.isfinite(params.beta_bound)
            beta3 = norm_moments(cs, 3)["beta"]
            assert params.beta_bound >= beta3 * (1.0 - 1e-9)

    def test_infeasible(self):
        with pytest.raises(InfeasibleTotal):
            samplesum_closed_form([1, 1], [[1, 0, 1, 0, 1]] * 2, 3)

    def test_json(self):
        laws = [IncrementLaw((0.0, 1.0), (0.5, 0.5))] * 2
        doc = samplesum_closed_form(
            [2, 2], [l.raw_moments(4) for l in laws], 2).to_json()
        assert doc["p"] == pytest.approx(0.5)
        assert math.isnan(doc["beta_3_bound"])


class TestDixon:
    def test_sweep(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            k = int(rng.integers(1, 5))
            N = int(rng.integers(4, 13))
            M = k * N
            n = int(rng.integers(max(1, M // 2), 3 * M))
            gum = calibrate("negbinomial", [float(k)] * N, n)
            cs = center(gum, PowerKernel(2), tail_eps=1e-16)
            params = dixon_closed_form(M, n, k)
            report = cross_check(params, cs)
            assert report.max_asserted_diff() <= 1e-9

    def test_leftover(self):
        params = dixon_closed_form(10, 5, 3)
        assert params.N == 3
        assert params.leftover == 1
        assert params.rho == pytest.approx(0.5)

    def test_gamma_closed_form(self):
        params = dixon_closed_form(8, 8, 2)
        assert params.fields["gamma"].value == pytest.approx(
            1.0 + 2.0 * 3.0 * 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            dixon_closed_form(0, 1, 1)

    def test_alpha30_reported_not_asserted(self):
        gum = calibrate("negbinomial", [2.0] * 8, 16)
        cs = center(gum, PowerKernel(2), tail_eps=1e-16)
        report = cross_check(dixon_closed_form(16, 16, 2), cs)
        row = [r for r in report.rows if r[0] == "alpha_30"][0]
        assert row[5] is False       # not asserted
        assert row[3] > 1e-6         # and it genuinely disagrees
