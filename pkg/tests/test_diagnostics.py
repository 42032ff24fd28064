"""Applicability gates: normalized absolute moments, the trigonometric
separation functional, and the assembled bound reports."""

import math

import numpy as np
import pytest

from urnedge.centering import center
from urnedge.diagnostics import gates, m_inf, norm_moments
from urnedge.errors import OrderTooHigh
from urnedge.kernels import PowerKernel
from urnedge.models import calibrate


@pytest.fixture(scope="module")
def chisq10():
    gum = calibrate("poisson", [0.1] * 10, 20)
    return center(gum, PowerKernel(2), tail_eps=1e-14)


class TestNormMoments:
    def test_second_order_standardized(self, chisq10):
        nm = norm_moments(chisq10, 2)
        assert nm["beta"] == pytest.approx(1.0, abs=1e-10)
        assert nm["kappa"] == pytest.approx(1.0, abs=1e-10)

    def test_order_bounds(self, chisq10):
        with pytest.raises(OrderTooHigh):
            norm_moments(chisq10, 1.5)
        with pytest.raises(OrderTooHigh):
            norm_moments(chisq10, 6.5)

    def test_fractional_orders_interpolate(self, chisq10):
        # log-convexity of absolute-moment sequences: the fractional order
        # sits under the geometric interpolation of its integer neighbours
        for key in ("beta", "kappa"):
            lo = norm_moments(chisq10, 2)[key]
            mid = norm_moments(chisq10, 2.5)[key]
            hi = norm_moments(chisq10, 3)[key]
            assert mid <= math.sqrt(lo * hi) * (1.0 + 1e-12)

    def test_log_convexity_sweep(self, chisq10):
        for j in (3.0, 4.0, 5.0):
            lo = norm_moments(chisq10, j - 1)["beta"]
            mid = norm_moments(chisq10, j)["beta"]
            hi = norm_moments(chisq10, j + 1)["beta"]
            assert mid <= math.sqrt(lo * hi) * (1.0 + 1e-12)


class TestMInf:
    def test_equal_p_poisson_closed_form(self):
        # per-cell gap 1 - e^{-2 lam (1 - cos tau)} is increasing on [0, pi],
        # so the infimum over [T, pi] is attained at T
        N, lam = 8, 1.5
        gum = calibrate("poisson", [1.0 / N] * N, int(N * lam))
        lam_eff = gum.cells[0].mean
        for T in (0.5, 1.0, 2.0, 3.0):
            want = N * (1.0 - math.exp(-2.0 * lam_eff * (1.0 - math.cos(T))))
            assert m_inf(gum, T) == pytest.approx(want, rel=1e-8)

    def test_empty_window_is_inf(self):
        gum = calibrate("poisson", [0.5, 0.5], 2)
        assert m_inf(gum, math.pi + 0.1) == math.inf

    def test_validation(self):
        gum = calibrate("poisson", [0.5, 0.5], 2)
        with pytest.raises(ValueError):
            m_inf(gum, 0.0)
        with pytest.raises(ValueError):
            m_inf(gum, 1.0, grid_points=100)

    def test_nondecreasing_in_t(self):
        # a larger T shrinks the window [T, pi], so the infimum can only grow
        rng = np.random.default_rng(3)
        from conftest import rng_models
        for gum in rng_models(rng, 20, max_cells=6):
            ts = np.sort(rng.uniform(0.2, math.pi, 4))
            vals = [m_inf(gum, float(t)) for t in ts]
            for a, b in zip(vals, vals[1:]):
                assert b >= a - 1e-9 * max(1.0, abs(a))

    def test_grid_doubling_stable(self):
        gum = calibrate("negbinomial", [1.5] * 6, 9)
        a = m_inf(gum, 0.7, grid_points=1024)
        b = m_inf(gum, 0.7, grid_points=2048)
        assert b == pytest.approx(a, rel=1e-6)

    def test_binomial_envelope(self):
        # |E e^{i tau xi}|^2 <= exp(-4 omega p q sin^2(tau/2)) gives a
        # lower envelope for the gap functional
        gum = calibrate("binomial", [3, 4, 5], 6)
        for T in (0.5, 1.5, 3.0):
            got = m_inf(gum, T)
            env = min(
                sum(1.0 - math.exp(-4.0 * int(round(c.shape)) * c.nu
                                   * (1.0 - c.nu) * math.sin(t / 2.0) ** 2)
                    for c in gum.cells)
                for t in np.linspace(T, math.pi, 2048))
            assert got >= env - 1e-9


class TestGates:
    def test_report_fields(self, chisq10):
        rep = gates(chisq10, 5, delta=1.0)
        assert rep.beta[2.0] == pytest.approx(1.0, abs=1e-10)
        assert rep.kappa[2.0] == pytest.approx(1.0, abs=1e-10)
        assert rep.upsilon >= 0.0
        assert rep.e_delta >= 0.0
        assert rep.t_gate > 0.0
        assert rep.thm32_rhs == pytest.approx(
            rep.beta[3.0] + rep.kappa[3.0] + rep.e_delta)
        assert rep.thm33_rhs_partial == rep.upsilon
        assert "oscillatory" in rep.omitted[0]

    def test_validation(self, chisq10):
        with pytest.raises(ValueError):
            gates(chisq10, 5, delta=0.0)
        with pytest.raises(ValueError):
            gates(chisq10, 6, delta=1.0)

    def test_lindeberg_huge_eps_vanishes(self, chisq10):
        rep = gates(chisq10, 4, delta=1.0, eps=1e6)
        assert rep.lindeberg["L2"] == 0.0
        assert rep.lindeberg["script_L2"] == 0.0

    def test_json_round(self, chisq10):
        doc = gates(chisq10, 5, delta=0.5).to_json()
        assert doc["s"] == 5
        assert doc["delta"] == 0.5
        assert set(doc["beta"]) == set(doc["kappa"])
        assert isinstance(doc["omitted"], list)
        # rows() mirrors the JSON content as printable pairs
        rows = gates(chisq10, 5, delta=0.5).rows()
        keys = [k for k, _ in rows]
        assert "upsilon" in keys and "T_gate" in keys

    def test_inf_window_serializes(self):
        from urnedge.diagnostics import BoundReport
        rep = BoundReport(
            s=4, delta=1.0, eps=1.0, beta={2.0: 1.0}, kappa={2.0: 1.0},
            m_at_upsilon_arg=math.inf, m_at_e_arg=math.inf, upsilon=1.0,
            e_delta=0.0, t_gate=1.0, lindeberg={"L2": 0.0},
            thm32_rhs=1.0, thm33_rhs_partial=1.0)
        doc = rep.to_json()
        assert doc["M_at_E_arg"] == "inf"
        assert doc["M_at_upsilon_arg"] == "inf"
