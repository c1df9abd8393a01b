"""Residual diagnostics for a fitted VAR.

All tests take residuals laid out ``n x T`` (one row per equation), the same
layout as :attr:`dyncause.var_engine.VarFit.residuals`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dyncause.causality import chi_square_upper_tail
from dyncause.exceptions import InsufficientObservations, SingularDesign

ADVISORY_LEVEL = 0.05


@dataclass(frozen=True)
class DiagnosticsReport:
    normality_pvalue: float
    arch_pvalue: float
    autocorrelation_pvalue: float

    @property
    def advisory(self) -> str:
        if self.normality_pvalue < ADVISORY_LEVEL or self.arch_pvalue < ADVISORY_LEVEL:
            return "use_bootstrap"
        return "asymptotic_ok"


def _as_rows(residuals) -> np.ndarray:
    u = np.asarray(residuals, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    if u.ndim != 2:
        raise ValueError("residuals must be an n x T matrix")
    return u


def doornik_hansen(residuals) -> tuple[float, int]:
    """Doornik-Hansen omnibus statistic and its chi-square degrees of freedom.

    The residuals are standardised, orthogonalised through the eigen
    decomposition of their correlation matrix, and each transformed series
    contributes a D'Agostino-transformed skewness and a Wilson-Hilferty
    transformed kurtosis (both approximately standard normal).
    """
    u = _as_rows(residuals)
    n, T = u.shape
    if T <= 7:
        raise InsufficientObservations("the normality test needs more than 7 observations")
    x = u - u.mean(axis=1, keepdims=True)
    S = x @ x.T / T
    sd = np.sqrt(np.diag(S))
    if np.any(sd <= 0):
        raise SingularDesign("a residual series has zero variance")
    R = S / np.outer(sd, sd)
    lam, H = np.linalg.eigh(R)
    if lam[0] <= 1e-12 * lam[-1]:
        raise SingularDesign("residual correlation matrix is singular")
    v = (H / np.sqrt(lam)) @ H.T @ (x / sd[:, None])

    m2 = np.mean(v**2, axis=1)
    skew = np.mean(v**3, axis=1) / m2**1.5
    kurt = np.mean(v**4, axis=1) / m2**2

    t = float(T)
    beta = 3 * (t * t + 27 * t - 70) * (t + 1) * (t + 3) / ((t - 2) * (t + 5) * (t + 7) * (t + 9))
    w2 = -1 + np.sqrt(2 * (beta - 1))
    delta = 1 / np.sqrt(np.log(np.sqrt(w2)))
    y = skew * np.sqrt((w2 - 1) / 2 * (t + 1) * (t + 3) / (6 * (t - 2)))
    z1 = delta * np.log(y + np.sqrt(y * y + 1))

    dk = (t - 3) * (t + 1) * (t * t + 15 * t - 4)
    a = (t - 2) * (t + 5) * (t + 7) * (t * t + 27 * t - 70) / (6 * dk)
    c = (t - 7) * (t + 5) * (t + 7) * (t * t + 2 * t - 5) / (6 * dk)
    k = (t + 5) * (t + 7) * (t**3 + 37 * t * t + 11 * t - 313) / (12 * dk)
    b1 = skew**2
    alpha = a + b1 * c
    chi = (kurt - 1 - b1) * 2 * k
    z2 = (np.cbrt(chi / (2 * alpha)) - 1 + 1 / (9 * alpha)) * np.sqrt(9 * alpha)

    return float(z1 @ z1 + z2 @ z2), 2 * n


def test_normality(residuals) -> float:
    """p-value of the Doornik-Hansen multivariate normality test."""
    stat, df = doornik_hansen(residuals)
    return chi_square_upper_tail(stat, df)


def _lm_trace(e: np.ndarray, W: np.ndarray) -> tuple[float, int]:
    """``T_aux * (m - tr(Sigma_aux Sigma_0^-1))`` for ``e (m x T)`` regressed on ``W (k x T)``.

    ``Sigma_0`` is the covariance of ``e`` about its mean, ``Sigma_aux`` the
    residual covariance after regressing on ``W`` (which must contain a
    constant row). The trace term is ``m`` minus a system R-squared.
    """
    m, T = e.shape
    if T <= W.shape[0]:
        raise InsufficientObservations("too few observations for the auxiliary regression")
    e0 = e - e.mean(axis=1, keepdims=True)
    coef, *_ = np.linalg.lstsq(W.T, e.T, rcond=None)
    resid = e - coef.T @ W
    S0 = e0 @ e0.T / T
    S1 = resid @ resid.T / T
    try:
        tr = np.trace(np.linalg.solve(S0, S1))
    except np.linalg.LinAlgError:
        raise SingularDesign("auxiliary covariance is singular") from None
    return float(T * (m - tr)), T


def _vech_products(u: np.ndarray) -> np.ndarray:
    rows, cols = np.tril_indices(u.shape[0])
    return u[rows] * u[cols]


def test_arch(residuals, order: int = 1) -> float:
    """Multivariate ARCH LM test of ``order`` lags.

    ``vech(u_t u_t')`` is regressed on a constant and its own ``order`` lags;
    the statistic ``T * (m - tr(S_aux S_0^-1))`` with ``m = n(n+1)/2`` is
    compared with chi-square on ``order * m^2`` degrees of freedom.
    """
    u = _as_rows(residuals)
    n, T = u.shape
    m = n * (n + 1) // 2
    if T <= m * (order + 1) + 2:
        raise InsufficientObservations(f"{T} observations are too few for a {n}-variate ARCH({order}) test")
    u = u - u.mean(axis=1, keepdims=True)
    v = _vech_products(u)
    e = v[:, order:]
    W = np.vstack([np.ones((1, T - order))] + [v[:, order - L : T - L] for L in range(1, order + 1)])
    stat, _ = _lm_trace(e, W)
    return chi_square_upper_tail(max(stat, 0.0), order * m * m)


def test_autocorrelation(residuals, lags: int = 1, regressors=None) -> float:
    """Multivariate LM test for residual autocorrelation up to ``lags``.

    The residuals are regressed on the original VAR regressors (a constant if
    none are given) plus ``lags`` lags of themselves, missing presample lags
    set to zero. Chi-square with ``lags * n^2`` degrees of freedom.
    """
    u = _as_rows(residuals)
    n, T = u.shape
    if regressors is None:
        Z = np.ones((1, T))
    else:
        Z = np.asarray(regressors, dtype=float)
        if Z.shape[1] != T:
            raise ValueError("regressors must have one column per residual")
    if T <= Z.shape[0] + n * lags + 1:
        raise InsufficientObservations(f"{T} observations are too few for the autocorrelation test")
    lagged = []
    for L in range(1, lags + 1):
        block = np.zeros((n, T))
        block[:, L:] = u[:, : T - L]
        lagged.append(block)
    W = np.vstack([Z] + lagged)
    if not np.any(np.all(Z == Z[:, :1], axis=1) & (Z[:, 0] != 0)):
        W = np.vstack([np.ones((1, T)), W])
    stat, _ = _lm_trace(u, W)
    return chi_square_upper_tail(max(stat, 0.0), lags * n * n)


def diagnose(fit, arch_order: int = 1, autocorrelation_lags: int = 1) -> DiagnosticsReport:
    """Run the three tests on a :class:`~dyncause.var_engine.VarFit`."""
    return DiagnosticsReport(
        normality_pvalue=test_normality(fit.residuals),
        arch_pvalue=test_arch(fit.residuals, arch_order),
        autocorrelation_pvalue=test_autocorrelation(fit.residuals, autocorrelation_lags, fit.regressors),
    )
