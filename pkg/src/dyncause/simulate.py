"""Data generators for Monte Carlo checks and demos."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

ErrorDraw = Callable[[np.random.Generator, int, int], np.ndarray]


def gaussian_errors(rng: np.random.Generator, T: int, n: int) -> np.ndarray:
    return rng.standard_normal((T, n))


def skewed_errors(df: int = 1) -> ErrorDraw:
    """Centred, unit-variance chi-square(df) shocks: ``(chi2 - df) / sqrt(2 df)``."""

    def draw(rng: np.random.Generator, T: int, n: int) -> np.ndarray:
        return (rng.chisquare(df, (T, n)) - df) / np.sqrt(2.0 * df)

    return draw


def arch_errors(alpha1: float = 0.6, omega: float | None = None) -> ErrorDraw:
    """Independent ARCH(1) shocks ``e_t = sqrt(omega + alpha1 e_{t-1}^2) z_t`` per series."""
    w = (1.0 - alpha1) if omega is None else omega

    def draw(rng: np.random.Generator, T: int, n: int) -> np.ndarray:
        z = rng.standard_normal((T + 100, n))
        e = np.zeros_like(z)
        for t in range(1, T + 100):
            e[t] = np.sqrt(w + alpha1 * e[t - 1] ** 2) * z[t]
        return e[100:]

    return draw


def simulate_var(
    coefs: Sequence[np.ndarray],
    T: int,
    rng: np.random.Generator,
    intercept: np.ndarray | None = None,
    errors: ErrorDraw = gaussian_errors,
    chol: np.ndarray | None = None,
    burn: int = 100,
) -> np.ndarray:
    """``T x n`` sample of ``x_t = c + sum_L A_L x_{t-L} + P e_t`` after ``burn`` discarded steps."""
    A = [np.asarray(a, dtype=float) for a in coefs]
    n = A[0].shape[0]
    p = len(A)
    c = np.zeros(n) if intercept is None else np.asarray(intercept, dtype=float)
    e = errors(rng, T + burn, n)
    if chol is not None:
        e = e @ np.asarray(chol, dtype=float).T
    x = np.zeros((T + burn, n))
    for t in range(p, T + burn):
        xt = c + e[t]
        for L in range(1, p + 1):
            xt = xt + A[L - 1] @ x[t - L]
        x[t] = xt
    return x[burn:]
