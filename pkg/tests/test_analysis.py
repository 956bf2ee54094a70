import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmclab.analysis import (
    AnalysisError,
    cantor_intervals,
    covering_sums,
    dimension_estimate,
    estimate_spectrum,
    hill_tail_index,
    kpz_solve,
    kpz_solve_dual,
    laplace_rhs_transform,
    lq_conjecture,
    ols_slope,
    sample_omega,
    verify_laplace,
)
from gmclab.chaos import LatticeMeasure, xi
from gmclab.field import Lattice

LN23 = np.log(2.0) / np.log(3.0)


class TestRegression:
    def test_exact_line(self):
        x = np.arange(10.0)
        slope, intercept, r2 = ols_slope(x, 3.5 * x - 2.0)
        assert abs(slope - 3.5) < 1e-9
        assert abs(intercept + 2.0) < 1e-9
        assert r2 == pytest.approx(1.0)

    def test_degenerate_x(self):
        with pytest.raises(AnalysisError):
            ols_slope(np.ones(5), np.arange(5.0))


class TestSpectrum:
    def test_recovers_power_law(self):
        rng = np.random.default_rng(0)
        lams = np.array([0.5, 0.25, 0.125, 0.0625])
        # masses = lam^2 * lognormal noise: slope of log E[m^q] is 2q
        noise = rng.lognormal(sigma=0.05, size=(4000, 1))
        samples = lams[None, :] ** 2 * noise
        fit = estimate_spectrum(lams, samples, [0.5, 1.0], rng=rng)
        np.testing.assert_allclose(fit.slopes, [1.0, 2.0], atol=0.01)
        assert np.all(fit.stderr < 0.05)

    def test_exact_power_law_to_1e9(self):
        lams = np.array([0.5, 0.25, 0.125, 0.0625])
        q_grid = np.array([0.5, 1.0, 1.5])
        # deterministic samples C_q lam^xi(q) per q cannot be encoded in one
        # mass array, so use q=1-compatible masses m = C lam^2 (xi-free check)
        samples = np.full((8, lams.size), 1.0) * 3.7 * lams[None, :] ** 2
        fit = estimate_spectrum(lams, samples, q_grid)
        np.testing.assert_allclose(fit.slopes, 2.0 * q_grid, atol=1e-9)

    def test_needs_enough_lambdas(self):
        with pytest.raises(AnalysisError):
            estimate_spectrum([0.5, 0.25], np.ones((10, 2)), [1.0])


class TestHill:
    def test_pareto_recovery(self):
        rng = np.random.default_rng(1)
        alpha = 0.5
        x = rng.random(100_000) ** (-1.0 / alpha)
        res = hill_tail_index(x, 2000)
        assert res.estimate == pytest.approx(alpha, abs=0.05)
        assert res.stable
        assert res.ci_lo < alpha < res.ci_hi

    def test_exponential_flagged_unstable(self):
        rng = np.random.default_rng(2)
        res = hill_tail_index(rng.exponential(size=100_000), 2000)
        assert not res.stable

    def test_small_k_rejected(self):
        with pytest.raises(AnalysisError):
            hill_tail_index(np.ones(100) + np.arange(100), 5)


class TestLaplace:
    def test_transform_value(self):
        from scipy.special import gamma as G

        v = laplace_rhs_transform(np.array([2.0]), 0.5, 1.0)
        assert v[0] == pytest.approx(np.exp(-G(0.5) / 0.5 * 2.0))

    def test_identical_samples_overlap(self):
        rng = np.random.default_rng(3)
        m = rng.lognormal(size=4000)
        # subordinated totals generated from the exact conditional law
        from scipy.special import gamma as G

        alpha = 0.5
        # one-sided 1/2-stable subordinator has the Levy closed form:
        # S = b^2/(2 N^2) with N standard normal gives E[e^(-uS)] = e^(-b sqrt(u))
        n2 = rng.standard_normal(m.size) ** 2
        b = (G(1 - alpha) / alpha) * m
        mbar = b**2 / (2 * n2)
        cmp = verify_laplace(mbar, m, alpha, [0.25, 1.0, 4.0], rng=rng)
        assert cmp.all_overlap

    def test_mismatch_detected(self):
        rng = np.random.default_rng(4)
        m = rng.lognormal(size=4000)
        cmp = verify_laplace(3.0 * m, m, 0.5, [0.25, 1.0, 4.0], rng=rng)
        assert not cmp.all_overlap


class TestOmega:
    def test_mgf_moment_match(self):
        rng = np.random.default_rng(5)
        lam, g2, q = 0.25, 0.8, 0.5
        w = sample_omega(lam, g2, 400_000, rng)
        emp = np.mean(np.exp(q * w))
        theory = lam ** (0.5 * g2 * q - 0.5 * g2 * q * q)
        se = np.std(np.exp(q * w), ddof=1) / np.sqrt(w.size)
        assert abs(emp - theory) < 4 * se


class TestCovering:
    def test_cantor_interval_count_and_length(self):
        iv = cantor_intervals(4)
        assert iv.shape == (16, 2)
        np.testing.assert_allclose(iv[:, 1] - iv[:, 0], 3.0**-4)

    def test_lebesgue_control_dimension(self):
        lat = Lattice(1, 729)
        uniform = LatticeMeasure(lat, np.full(729, lat.spacing))
        levels = range(1, 7)
        s_grid = np.linspace(0.5, 0.75, 11)
        table = covering_sums(uniform, "cantor", levels, s_grid)
        est = dimension_estimate(list(levels), s_grid, table.sums)
        assert est.estimate == pytest.approx(LN23, abs=1e-6)

    def test_interval_control_dimension(self):
        lat = Lattice(1, 1024)
        uniform = LatticeMeasure(lat, np.full(1024, lat.spacing))
        levels = range(1, 6)
        s_grid = np.linspace(0.8, 1.2, 9)
        table = covering_sums(uniform, "interval", levels, s_grid)
        est = dimension_estimate(list(levels), s_grid, table.sums)
        assert est.estimate == pytest.approx(1.0, abs=1e-6)

    def test_misaligned_lattice_rejected(self):
        lat = Lattice(1, 1000)  # not a multiple of 3^g
        uniform = LatticeMeasure(lat, np.full(1000, lat.spacing))
        with pytest.raises(AnalysisError):
            covering_sums(uniform, "cantor", [3], [0.5])


class TestKpz:
    def test_golden_values(self):
        # frozen quadratic-oracle roots
        assert kpz_solve(LN23, 1.0, 1) == pytest.approx(0.505947439590298, rel=1e-12)
        assert kpz_solve(LN23, 0.5, 1) == pytest.approx(0.569642264834269, rel=1e-12)
        assert kpz_solve_dual(LN23, 1.0, 1) == pytest.approx(0.252973719795149, rel=1e-12)

    def test_identity_endpoints(self):
        for g2 in (0.3, 1.0, 1.7):
            assert kpz_solve(0.0, g2, 1) == 0.0
            assert kpz_solve(1.0, g2, 1) == pytest.approx(1.0)

    @given(st.floats(0.0, 1.0), st.floats(0.05, 1.9))
    @settings(max_examples=60, deadline=None)
    def test_root_property(self, dim_leb, g2):
        x = kpz_solve(dim_leb, g2, 1)
        assert 0.0 <= x <= 1.0
        assert xi(g2, 1, x) == pytest.approx(dim_leb, abs=1e-9)

    @given(st.floats(0.0, 1.0), st.floats(0.05, 1.9))
    @settings(max_examples=60, deadline=None)
    def test_dual_is_alpha_times_primal(self, dim_leb, g2):
        alpha = g2 / 2.0
        assert kpz_solve_dual(dim_leb, g2, 1) == pytest.approx(
            alpha * kpz_solve(dim_leb, g2, 1), abs=1e-12)

    def test_gamma_zero_is_identity(self):
        assert kpz_solve(0.37, 0.0, 1) == pytest.approx(0.37)


class TestLqConjecture:
    def test_zero_above_alpha(self):
        tau = lq_conjecture([0.5, 0.8, 1.5], 1.0, 0.5, 1)
        np.testing.assert_allclose(tau, 0.0, atol=1e-12)

    def test_anchor_at_zero(self):
        tau = lq_conjecture([0.0], 1.0, 0.5, 1)
        assert tau[0] == pytest.approx(-1.0)

    def test_continuous_at_alpha(self):
        eps = 1e-9
        lo = lq_conjecture([0.5 - eps], 1.0, 0.5, 1)[0]
        assert abs(lo) < 1e-6
