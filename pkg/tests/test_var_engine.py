import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dyncause.exceptions import InsufficientObservations, NonPositiveDefinite, SingularDesign
from dyncause.simulate import simulate_var
from dyncause.var_engine import (
    VarSpec,
    assemble_regressors,
    estimate_var,
    fit_var,
    hjc,
    max_feasible_lag,
    select_lag,
)


@pytest.fixture
def random_data():
    rng = np.random.default_rng(42)
    return simulate_var([np.array([[0.5, 0.1], [0.2, 0.4]])], 80, rng)


class TestAssemble:
    def test_dimensions(self):
        Y, Z = assemble_regressors(np.arange(10.0).reshape(5, 2), VarSpec(p=1, d=1))
        assert Y.shape == (2, 3)
        assert Z.shape == (5, 3)

    def test_columns_reproduce_lags(self):
        x = np.arange(24.0).reshape(8, 3)
        Y, Z = assemble_regressors(x, VarSpec(p=2, d=1))
        for j, t in enumerate(range(3, 8)):
            assert_array_equal(Y[:, j], x[t])
            assert Z[0, j] == 1.0
            assert_array_equal(Z[1:4, j], x[t - 1])
            assert_array_equal(Z[4:7, j], x[t - 2])
            assert_array_equal(Z[7:10, j], x[t - 3])

    def test_no_intercept(self):
        _, Z = assemble_regressors(np.ones((6, 2)), VarSpec(p=1, d=0, include_intercept=False))
        assert Z.shape == (2, 5)

    def test_constant_series_is_singular(self):
        x = np.column_stack([np.full(20, 3.0), np.arange(20.0) ** 0.5])
        Y, Z = assemble_regressors(x, VarSpec(p=1, d=1))
        assert np.all(Z[1] == 3.0)
        with pytest.raises(SingularDesign):
            estimate_var(Y, Z)

    def test_too_short(self):
        with pytest.raises(InsufficientObservations):
            assemble_regressors(np.ones((2, 2)), VarSpec(p=1, d=1))


class TestEstimate:
    def test_exact_ar(self):
        x = 0.5 ** np.arange(30.0)
        data = np.column_stack([x, 2 * x + 0.0])
        data[:, 1] = 0.3 ** np.arange(30.0)
        fit = fit_var(data, VarSpec(p=1, d=0, include_intercept=False))
        assert_allclose(fit.coefficients, [[0.5, 0.0], [0.0, 0.3]], atol=1e-10)
        assert np.max(np.abs(fit.residuals)) < 1e-12

    def test_tiny_case_matches_normal_equations(self):
        data = np.array([[1.0, 2.0], [0.5, -1.0], [2.0, 0.3], [-0.7, 1.1]])
        spec = VarSpec(p=1, d=0, include_intercept=False)
        Y, Z = assemble_regressors(data, spec)
        fit = estimate_var(Y, Z)
        # oracle: solve (Z Z') B' = Z Y' column by column
        expect = np.linalg.solve(Z @ Z.T, Z @ Y.T).T
        assert_allclose(fit.coefficients, expect, rtol=1e-12)

    def test_leverages(self, random_data):
        fit = fit_var(random_data, VarSpec(p=2, d=1))
        assert fit.leverages.sum() == pytest.approx(fit.q, abs=1e-8)
        assert np.all(fit.leverages >= 0) and np.all(fit.leverages < 1)
        hat = fit.regressors.T @ np.linalg.inv(fit.regressors @ fit.regressors.T) @ fit.regressors
        assert_allclose(fit.leverages, np.diag(hat), rtol=1e-10)

    def test_residual_orthogonality(self, random_data):
        fit = fit_var(random_data, VarSpec(p=3, d=1))
        assert np.max(np.abs(fit.residuals @ fit.regressors.T)) < 1e-8

    def test_sigma_bruteforce(self, random_data):
        fit = fit_var(random_data, VarSpec(p=2, d=1))
        T, q = fit.nobs, fit.q
        V = fit.residuals
        brute = np.zeros((2, 2))
        for t in range(T):
            brute += np.outer(V[:, t], V[:, t])
        assert_allclose(fit.sigma_u, brute / (T - q), rtol=1e-12)
        assert np.all(np.linalg.eigvalsh(fit.sigma_u) >= 0)

    def test_permutation_equivariance(self, random_data):
        spec = VarSpec(p=2, d=1)
        fit = fit_var(random_data, spec)
        perm = fit_var(random_data[:, ::-1], spec)
        # permuting series swaps equation rows and the variable order inside each lag block
        order = [0] + [1 + L * 2 + j for L in range(3) for j in (1, 0)]
        assert_allclose(perm.coefficients, fit.coefficients[::-1][:, order], rtol=1e-10)
        assert_allclose(perm.sigma_u, fit.sigma_u[::-1, ::-1], rtol=1e-10)

    def test_beta_is_column_stacked(self, random_data):
        fit = fit_var(random_data, VarSpec(p=1, d=1))
        D = fit.coefficients
        assert_array_equal(fit.beta[:2], D[:, 0])
        assert_array_equal(fit.beta[2:4], D[:, 1])


class TestHJC:
    def test_hand_value(self):
        # (4 ln 100 + 8 ln ln 100) / 200
        assert hjc(np.eye(2), 1, 100, 2) == pytest.approx(0.15319, abs=1e-4)

    def test_linear_in_p(self):
        base = hjc(np.eye(3), 1, 50, 3)
        assert hjc(np.eye(3), 2, 50, 3) == pytest.approx(2 * base, rel=1e-14)

    @pytest.mark.parametrize("T", [3, 10, 1000])
    def test_positive_penalty(self, T):
        assert hjc(np.eye(2), 1, T, 2) > 0

    def test_logdet_term(self):
        s = np.array([[2.0, 0.3], [0.3, 1.0]])
        pen = hjc(np.eye(2), 1, 60, 2)
        assert hjc(s, 1, 60, 2) == pytest.approx(math.log(np.linalg.det(s)) + pen)

    def test_not_pd(self):
        with pytest.raises(NonPositiveDefinite):
            hjc(np.array([[1.0, 2.0], [2.0, 1.0]]), 1, 50, 2)


class TestSelectLag:
    def test_pmax_one(self, random_data):
        assert select_lag(random_data, 1)[0] == 1

    def test_common_sample(self, random_data):
        p, table = select_lag(random_data, 3)
        assert set(table) == {1, 2, 3}
        # recompute p=2 by hand on the last T - 3 observations
        T = random_data.shape[0]
        Y, Z = assemble_regressors(random_data[1:], VarSpec(p=2, d=0))
        assert Y.shape[1] == T - 3
        D = Y @ Z.T @ np.linalg.inv(Z @ Z.T)
        V = Y - D @ Z
        assert table[2] == pytest.approx(hjc(V @ V.T / (T - 3), 2, T - 3, 2), rel=1e-10)
        assert p == min(table, key=lambda k: (table[k], k))

    def test_tie_goes_to_smaller(self, monkeypatch):
        import dyncause.var_engine as ve

        monkeypatch.setattr(ve, "hjc", lambda sigma, p, T, n: 1.0)
        assert ve.select_lag(np.random.default_rng(0).normal(size=(40, 2)), 4)[0] == 1

    @pytest.mark.slow
    def test_monte_carlo_var1(self):
        rng = np.random.default_rng(2024)
        A = np.array([[0.5, 0.2], [0.0, 0.4]])
        hits = sum(select_lag(simulate_var([A], 200, rng), 4)[0] == 1 for _ in range(200))
        assert hits / 200 >= 0.80


def test_max_feasible_lag():
    # T - p - d > 1 + n (p + d)
    assert max_feasible_lag(11, 2, 1) == 2
    assert max_feasible_lag(5, 2, 1) == 0
    p = max_feasible_lag(30, 2, 1)
    assert 30 - p - 1 > 1 + 2 * (p + 1)
    assert not 30 - (p + 1) - 1 > 1 + 2 * (p + 2)
