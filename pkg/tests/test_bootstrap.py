import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import dyncause.bootstrap as bs
from dyncause.bootstrap import (
    BootstrapConfig,
    adjust_residuals,
    critical_value,
    distribution_from_statistics,
    estimate_restricted,
    run_bootstrap,
)
from dyncause.causality import CausalityHypothesis, build_restriction, wald_statistic
from dyncause.exceptions import LeverageOutOfRange, TooManySingularReplications
from dyncause.simulate import arch_errors, gaussian_errors, simulate_var
from dyncause.var_engine import VarSpec, assemble_regressors, estimate_var, fit_var

NULL_A = np.array([[0.5, 0.0], [0.3, 0.4]])
H0 = CausalityHypothesis(cause=1, effect=0)


@pytest.fixture(scope="module")
def data60():
    return simulate_var([NULL_A], 60, np.random.default_rng(60))


class TestCriticalValue:
    def test_order_statistic(self):
        values = np.arange(1.0, 10001.0)
        cv = critical_value(values, 0.05)
        assert cv == 9501.0
        assert np.sum(values >= cv) == 500

    def test_half(self):
        assert critical_value(np.arange(1.0, 11.0), 0.5) == 6.0

    def test_constant(self):
        dist = distribution_from_statistics(np.full(300, 2.5), (0.05, 0.1, 0.5))
        assert set(dist.critical_values.values()) == {2.5}

    def test_clamped(self):
        assert critical_value(np.arange(5.0), 0.01) == 4.0

    def test_monotone_in_alpha(self):
        vals = np.random.default_rng(1).chisquare(2, 777)
        cvs = [critical_value(vals, a) for a in (0.01, 0.05, 0.1, 0.25, 0.5)]
        assert all(x >= y for x, y in zip(cvs, cvs[1:]))

    def test_bad_alpha(self):
        with pytest.raises(ValueError):
            critical_value(np.ones(10), 0.6)


class TestAdjust:
    def test_zero_leverage(self):
        r = np.array([[1.0, -2.0, 0.5]])
        assert_array_equal(adjust_residuals(r, np.zeros(3)), r)

    def test_doubling(self):
        assert_allclose(adjust_residuals([[3.0]], [0.75]), [[6.0]])

    @pytest.mark.parametrize("h", [1.0, -0.1, 1.5])
    def test_out_of_range(self, h):
        with pytest.raises(LeverageOutOfRange):
            adjust_residuals([[1.0]], [h])

    def test_draws_are_centered(self, data60):
        sim = bs._Simulator(data60, VarSpec(p=1, d=1), H0)
        shocks = sim.draw_shocks(bs._stream_key(5, (0,)), 0, 50)
        assert np.max(np.abs(shocks.mean(axis=1))) < 1e-12


class TestRestricted:
    def test_empty_selector_is_unrestricted(self, data60):
        Y, Z = assemble_regressors(data60, VarSpec(p=2, d=1))
        r = estimate_restricted(Y, Z, np.zeros((0, 2 * Z.shape[0])))
        fit = estimate_var(Y, Z)
        assert_allclose(r.coefficients, fit.coefficients, rtol=1e-10, atol=1e-12)
        assert_allclose(r.residuals, fit.residuals, atol=1e-10)
        assert_allclose(r.leverages, np.broadcast_to(fit.leverages, (2, Z.shape[1])), atol=1e-12)

    def test_restricted_coefficients_zero_and_rss_larger(self, data60):
        spec = VarSpec(p=2, d=1)
        Y, Z = assemble_regressors(data60, spec)
        C = build_restriction(spec, H0, 2)
        r = estimate_restricted(Y, Z, C)
        assert_array_equal(C @ r.coefficients.reshape(-1, order="F"), 0.0)
        fit = estimate_var(Y, Z)
        assert np.sum(r.residuals**2) >= np.sum(fit.residuals**2)
        # untouched equation is the unrestricted OLS
        assert_allclose(r.coefficients[1], fit.coefficients[1], rtol=1e-10)
        assert_allclose(r.leverages[1], fit.leverages, atol=1e-12)
        assert r.leverages[0].sum() == pytest.approx(Z.shape[0] - spec.p, abs=1e-8)

    def test_restricted_matches_lstsq(self, data60):
        spec = VarSpec(p=2, d=1)
        Y, Z = assemble_regressors(data60, spec)
        r = estimate_restricted(Y, Z, build_restriction(spec, H0, 2))
        keep = [c for c in range(Z.shape[0]) if c not in (spec.lag_row(1, 1, 2), spec.lag_row(2, 1, 2))]
        coef, *_ = np.linalg.lstsq(Z[keep].T, Y[0], rcond=None)
        assert_allclose(r.coefficients[0, keep], coef, rtol=1e-9)

    def test_covariances_agree_when_null_true(self):
        data = simulate_var([NULL_A], 500, np.random.default_rng(500))
        spec = VarSpec(p=1, d=1)
        Y, Z = assemble_regressors(data, spec)
        r = estimate_restricted(Y, Z, build_restriction(spec, H0, 2))
        fit = estimate_var(Y, Z)
        ratio = np.linalg.det(r.residuals @ r.residuals.T) / np.linalg.det(fit.residuals @ fit.residuals.T)
        assert 0.9 <= ratio <= 1.1


class TestRunBootstrap:
    def test_deterministic_across_workers(self, data60):
        spec = VarSpec(p=2, d=1)
        one = run_bootstrap(data60, spec, H0, BootstrapConfig(1000, master_seed=9, workers=1))
        many = run_bootstrap(data60, spec, H0, BootstrapConfig(1000, master_seed=9, workers=4))
        assert one.values.tobytes() == many.values.tobytes()
        assert one.critical_values == many.critical_values

    def test_streams_and_seeds_differ(self, data60):
        spec = VarSpec(p=1, d=1)
        a = run_bootstrap(data60, spec, H0, BootstrapConfig(200, master_seed=1), stream=(0,))
        b = run_bootstrap(data60, spec, H0, BootstrapConfig(200, master_seed=1), stream=(1,))
        c = run_bootstrap(data60, spec, H0, BootstrapConfig(200, master_seed=2), stream=(0,))
        assert not np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_replication_independent_of_chunking(self, data60, monkeypatch):
        spec = VarSpec(p=1, d=1)
        ref = run_bootstrap(data60, spec, H0, BootstrapConfig(300, master_seed=4))
        monkeypatch.setattr(bs, "CHUNK_SIZE", 7)
        other = run_bootstrap(data60, spec, H0, BootstrapConfig(300, master_seed=4))
        assert_allclose(other.values, ref.values, rtol=1e-12)

    def test_distribution_shape(self, data60):
        dist = run_bootstrap(data60, VarSpec(p=1, d=1), H0, BootstrapConfig(500, master_seed=3))
        assert dist.values.shape == (500,)
        assert np.all(np.diff(dist.values) >= 0)
        assert dist.critical_values[0.05] >= dist.critical_values[0.10]
        assert dist.failures == 0 and dist.reliable
        # null is true here: the 5% cv should be in the chi2(1) neighbourhood
        assert 2.0 < dist.critical_values[0.05] < 8.0

    def test_too_many_failures(self, data60, monkeypatch):
        real = bs._wald_batch

        def flaky(*args):
            out = real(*args)
            out[::50] = np.nan
            return out

        monkeypatch.setattr(bs, "_wald_batch", flaky)
        with pytest.raises(TooManySingularReplications):
            run_bootstrap(data60, VarSpec(p=1, d=1), H0, BootstrapConfig(500))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BootstrapConfig(50)
        with pytest.raises(ValueError):
            BootstrapConfig(100, significance_levels=(0.7,))


def _rejection_rates(rng, errors, outer, T, B):
    spec = VarSpec(p=1, d=1)
    C = build_restriction(spec, H0, 2)
    boot_rej = asy_rej = 0
    for r in range(outer):
        x = simulate_var([NULL_A], T, rng, errors=errors)
        out = wald_statistic(fit_var(x, spec), C)
        dist = run_bootstrap(x, spec, H0, BootstrapConfig(B, (0.05,), master_seed=r))
        boot_rej += out.statistic > dist.critical_values[0.05]
        asy_rej += out.asymptotic_pvalue < 0.05
    return boot_rej / outer, asy_rej / outer


@pytest.mark.slow
def test_size_control_gaussian():
    boot, asy = _rejection_rates(np.random.default_rng(100), gaussian_errors, 300, 100, 500)
    print(f"gaussian: bootstrap {boot:.3f}, asymptotic {asy:.3f}")
    assert 0.03 <= boot <= 0.08


@pytest.mark.slow
def test_size_control_arch():
    boot, asy = _rejection_rates(np.random.default_rng(101), arch_errors(0.6), 300, 100, 500)
    print(f"ARCH(1): bootstrap {boot:.3f}, asymptotic {asy:.3f}")
    assert 0.025 <= boot <= 0.09

