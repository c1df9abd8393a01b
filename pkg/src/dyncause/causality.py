"""Restriction selector and Wald statistic for Granger non-causality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from dyncause.exceptions import SingularCovariance
from dyncause.var_engine import VarFit, VarSpec


@dataclass(frozen=True)
class CausalityHypothesis:
    """H0: variable ``cause`` does not Granger-cause variable ``effect``.

    Indices are 0-based columns of the data matrix handed to the VAR.
    ``component_pair`` is descriptive only; the data passed in must already
    hold the matching components.
    """

    cause: int
    effect: int
    component_pair: str = "raw"

    def validate(self, n: int) -> None:
        if self.cause == self.effect:
            raise ValueError("cause and effect indices must differ")
        for idx in (self.cause, self.effect):
            if not 0 <= idx < n:
                raise ValueError(f"index {idx} outside a system of dimension {n}")


@dataclass(frozen=True)
class WaldOutcome:
    statistic: float
    df: int
    asymptotic_pvalue: float
    p_used: int
    d_used: int


def restricted_positions(spec: VarSpec, hyp: CausalityHypothesis, n: int) -> np.ndarray:
    """Positions in ``vec(D)`` of the coefficients set to zero under H0."""
    hyp.validate(n)
    rows = [spec.lag_row(r, hyp.cause, n) for r in range(1, spec.p + 1)]
    return np.array([row * n + hyp.effect for row in rows], dtype=np.intp)


def build_restriction(spec: VarSpec, hyp: CausalityHypothesis, n: int) -> np.ndarray:
    """One-hot selector ``C`` (p rows) picking lags ``1..p`` of ``cause`` in the ``effect`` equation.

    The ``d`` augmentation lags and the intercept are never restricted.
    """
    pos = restricted_positions(spec, hyp, n)
    C = np.zeros((spec.p, n * spec.nregressors(n)))
    C[np.arange(spec.p), pos] = 1.0
    return C


def chi_square_upper_tail(x: float, df: int) -> float:
    """``P(chi2_df > x)`` through the regularized upper incomplete gamma function."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if df < 1:
        raise ValueError("df must be >= 1")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def wald_statistic(fit: VarFit, C) -> WaldOutcome:
    """Wald statistic ``(C b)' [C ((ZZ')^-1 kron Sigma_u) C']^-1 (C b)``."""
    C = np.asarray(C, dtype=float)
    cov = np.kron(fit.zz_inv, fit.sigma_u)
    cb = C @ fit.beta
    inner = C @ cov @ C.T
    try:
        solved = np.linalg.solve(inner, cb)
    except np.linalg.LinAlgError:
        raise SingularCovariance("restricted block of the coefficient covariance is singular") from None
    stat = max(float(cb @ solved), 0.0)
    df = C.shape[0]
    spec = fit.spec
    return WaldOutcome(
        statistic=stat,
        df=df,
        asymptotic_pvalue=chi_square_upper_tail(stat, df),
        p_used=spec.p if spec is not None else df,
        d_used=spec.d if spec is not None else 0,
    )


def _wald_batch(D: np.ndarray, zz_inv: np.ndarray, sigma: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Wald statistics for stacks of fits, for a one-hot selector given by ``pos``.

    Uses ``Cov(vec D)[c1*n+i1, c2*n+i2] = (ZZ')^-1[c1, c2] * Sigma[i1, i2]``.
    Returns NaN where the restricted covariance block is not positive definite.
    """
    n = D.shape[-2]
    col, row = np.divmod(pos, n)
    b = D[..., row, col]
    inner = zz_inv[..., col[:, None], col[None, :]] * sigma[..., row[:, None], row[None, :]]
    out = np.full(b.shape[:-1], np.nan)
    good = np.all(np.isfinite(inner), axis=(-1, -2))
    if np.any(good):
        eye = np.eye(len(pos))
        safe = np.where(good[..., None, None], inner, eye)
        sign, _ = np.linalg.slogdet(safe)
        good &= sign > 0
        safe = np.where(good[..., None, None], safe, eye)
        x = np.linalg.solve(safe, b[..., None])[..., 0]
        out = np.where(good, np.maximum(np.einsum("...i,...i->...", b, x), 0.0), np.nan)
    return out
