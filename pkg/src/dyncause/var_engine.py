"""Lag-augmented VAR estimation by multivariate least squares.

Layout conventions used throughout the package:

* ``Y`` is ``n x T_eff``: observations ``t = p+d, ..., T-1`` (0-based).
* ``Z`` is ``q x T_eff`` with column ``t`` equal to
  ``[1, x[t-1], x[t-2], ..., x[t-p-d]]`` (intercept first, then lag blocks of
  ``n`` rows each), so ``q = 1 + n*(p+d)``.
* ``D = Y Z' (Z Z')^-1`` is ``n x q``; ``vec(D)`` stacks its columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dyncause.exceptions import InsufficientObservations, NonPositiveDefinite, SingularDesign

RCOND_THRESHOLD = 1e-12


@dataclass(frozen=True)
class VarSpec:
    p: int
    d: int = 1
    include_intercept: bool = True

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"lag order p must be >= 1, got {self.p}")
        if self.d < 0:
            raise ValueError(f"extra lags d must be >= 0, got {self.d}")

    @property
    def lags(self) -> int:
        return self.p + self.d

    def nregressors(self, n: int) -> int:
        return int(self.include_intercept) + n * self.lags

    def lag_row(self, lag: int, var: int, n: int) -> int:
        """Row of ``Z`` holding variable ``var`` at lag ``lag`` (1-based lag)."""
        return int(self.include_intercept) + (lag - 1) * n + var


@dataclass(frozen=True)
class VarFit:
    """Estimated VAR. Arrays follow the layout in the module docstring."""

    coefficients: np.ndarray
    residuals: np.ndarray
    sigma_u: np.ndarray
    leverages: np.ndarray
    regressors: np.ndarray
    zz_inv: np.ndarray
    spec: VarSpec | None = None

    @property
    def q(self) -> int:
        return self.regressors.shape[0]

    @property
    def nobs(self) -> int:
        return self.regressors.shape[1]

    @property
    def beta(self) -> np.ndarray:
        """Column-stacked coefficient vector ``vec(D)``."""
        return self.coefficients.reshape(-1, order="F")


def assemble_regressors(data, spec: VarSpec) -> tuple[np.ndarray, np.ndarray]:
    """Build ``(Y, Z)`` from a ``T x n`` data matrix."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ValueError("data must be a T x n matrix")
    T, n = x.shape
    k = spec.lags
    if T <= k:
        raise InsufficientObservations(f"{T} observations cannot support {k} lags")
    blocks = [x[k - lag : T - lag].T for lag in range(1, k + 1)]
    if spec.include_intercept:
        blocks.insert(0, np.ones((1, T - k)))
    Z = np.vstack(blocks) if blocks else np.empty((0, T - k))
    return x[k:].T.copy(), Z


def _spd_inverse(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of a stack of symmetric matrices ``(..., q, q)`` via Cholesky.

    Returns ``(inverse, ok)``; ``ok`` is False where the diagonally scaled
    matrix has reciprocal condition number below ``RCOND_THRESHOLD`` or is
    not positive definite. Failed entries hold NaN.
    """
    diag = np.einsum("...ii->...i", A)
    ok = np.all(diag > 0, axis=-1)
    scale = 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0))
    S = A * scale[..., :, None] * scale[..., None, :]
    eig = np.linalg.eigvalsh(S)
    with np.errstate(divide="ignore", invalid="ignore"):
        rcond = eig[..., 0] / eig[..., -1]
    ok &= np.isfinite(rcond) & (rcond >= RCOND_THRESHOLD)
    eye = np.eye(A.shape[-1])
    S_safe = np.where(ok[..., None, None], S, eye)
    L = np.linalg.cholesky(S_safe)
    L_inv = np.linalg.inv(L)
    S_inv = np.swapaxes(L_inv, -1, -2) @ L_inv
    inv = S_inv * scale[..., :, None] * scale[..., None, :]
    inv = np.where(ok[..., None, None], inv, np.nan)
    return inv, ok


def _ols(Y: np.ndarray, Z: np.ndarray, dof_correct: bool = True):
    """Batched multivariate LS on stacks ``Y (..., n, T)`` and ``Z (..., q, T)``."""
    q, T = Z.shape[-2:]
    zz_inv, ok = _spd_inverse(Z @ np.swapaxes(Z, -1, -2))
    D = (Y @ np.swapaxes(Z, -1, -2)) @ zz_inv
    V = Y - D @ Z
    denom = (T - q) if dof_correct else T
    sigma = (V @ np.swapaxes(V, -1, -2)) / denom
    return D, V, sigma, zz_inv, ok


def estimate_var(Y, Z, spec: VarSpec | None = None) -> VarFit:
    """Multivariate least squares ``D = Y Z'(Z Z')^-1``.

    The residual covariance divides by ``T_eff - q``; leverages are the
    diagonal of the hat matrix ``Z'(ZZ')^-1 Z``.
    """
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    q, T = Z.shape
    if T <= q:
        raise InsufficientObservations(
            f"{T} effective observations cannot identify {q} parameters per equation"
        )
    D, V, sigma, zz_inv, ok = _ols(Y, Z)
    if not ok:
        raise SingularDesign("Z Z' is singular or ill-conditioned (rcond < 1e-12)")
    leverages = np.einsum("it,it->t", Z, zz_inv @ Z)
    return VarFit(
        coefficients=D,
        residuals=V,
        sigma_u=(sigma + sigma.T) / 2,
        leverages=leverages,
        regressors=Z,
        zz_inv=zz_inv,
        spec=spec,
    )


def fit_var(data, spec: VarSpec) -> VarFit:
    Y, Z = assemble_regressors(data, spec)
    return estimate_var(Y, Z, spec)


def hjc(sigma, p: int, T: int, n: int) -> float:
    """Lag-order criterion ``ln|sigma| + p (n^2 ln T + 2 n^2 ln ln T) / (2T)``."""
    if T <= math.e:
        raise ValueError("T must exceed e so that ln(ln T) is defined")
    sign, logdet = np.linalg.slogdet(np.asarray(sigma, dtype=float))
    if sign <= 0 or not np.isfinite(logdet):
        raise NonPositiveDefinite("residual covariance is not positive definite")
    n2 = n * n
    return float(logdet + p * (n2 * math.log(T) + 2 * n2 * math.log(math.log(T))) / (2 * T))


def select_lag(data, p_max: int, d: int = 1, include_intercept: bool = True) -> tuple[int, dict[int, float]]:
    """Choose ``p in 1..p_max`` minimising HJC.

    Every candidate is fitted without the ``d`` augmentation lags on the same
    effective sample (the last ``T - p_max`` observations). The criterion uses
    the ML covariance ``V V' / T_common``. Ties go to the smaller ``p``.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    x = np.asarray(data, dtype=float)
    T, n = x.shape
    if T - p_max - d <= int(include_intercept) + n * (p_max + d):
        raise InsufficientObservations(
            f"{T} observations are too few for p_max={p_max} with d={d}"
        )
    T_c = T - p_max
    table: dict[int, float] = {}
    best_p, best = 1, math.inf
    for p in range(1, p_max + 1):
        spec = VarSpec(p=p, d=0, include_intercept=include_intercept)
        Y, Z = assemble_regressors(x[p_max - p :], spec)
        _, _, sigma, _, ok = _ols(Y, Z, dof_correct=False)
        try:
            if not ok:
                raise SingularDesign(f"lag-selection regression with p={p} is singular")
            table[p] = hjc(sigma, p, T_c, n)
        except (SingularDesign, NonPositiveDefinite, ValueError):
            if p_max == 1:
                # nothing to compare against
                return 1, table
            raise
        if table[p] < best:
            best_p, best = p, table[p]
    return best_p, table


def max_feasible_lag(T: int, n: int, d: int, include_intercept: bool = True) -> int:
    """Largest ``p`` such that both lag selection and the augmented fit are estimable."""
    p = 0
    while T - (p + 1) - d > int(include_intercept) + n * (p + 1 + d):
        p += 1
    return p
