"""Leverage-adjusted residual bootstrap for the Wald non-causality statistic.

Each replication ``b`` draws from its own Philox stream whose key comes from
``(master_seed, stream)`` and whose counter starts at ``b``. The result is
therefore a pure function of the seed and inputs, independent of how
replications are chunked or scheduled across threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from dyncause.causality import CausalityHypothesis, _wald_batch, build_restriction, restricted_positions
from dyncause.exceptions import (
    InsufficientObservations,
    LeverageOutOfRange,
    SingularDesign,
    TooManySingularReplications,
)
from dyncause.var_engine import VarSpec, _ols, _spd_inverse, assemble_regressors

MAX_FAILURE_RATE = 0.01
CHUNK_SIZE = 256


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = 10000
    significance_levels: tuple[float, ...] = (0.05, 0.10)
    master_seed: int = 0
    workers: int | None = 1

    def __post_init__(self) -> None:
        if self.replications < 100:
            raise ValueError(f"need at least 100 replications, got {self.replications}")
        levels = tuple(float(a) for a in self.significance_levels)
        if not levels or any(not 0 < a <= 0.5 for a in levels):
            raise ValueError(f"significance levels must lie in (0, 0.5], got {levels}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "significance_levels", levels)


@dataclass(frozen=True)
class BootstrapDistribution:
    values: np.ndarray
    critical_values: dict[float, float]
    failures: int = 0
    replications: int = 0

    @property
    def failure_rate(self) -> float:
        return self.failures / self.replications if self.replications else 0.0

    @property
    def reliable(self) -> bool:
        return self.failure_rate <= MAX_FAILURE_RATE


@dataclass(frozen=True)
class RestrictedFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    leverages: np.ndarray = field(repr=False)


def critical_value(dist: BootstrapDistribution | np.ndarray, alpha: float) -> float:
    """Upper ``alpha`` quantile: the k-th largest value, ``k = floor(alpha * (B + 1))`` clamped to ``[1, B]``."""
    if not 0 < alpha <= 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5], got {alpha}")
    values = dist.values if isinstance(dist, BootstrapDistribution) else np.sort(np.asarray(dist, float))
    B = values.shape[0]
    if B == 0:
        raise ValueError("empty bootstrap distribution")
    k = min(max(math.floor(alpha * (B + 1) + 1e-9), 1), B)
    return float(values[B - k])


def distribution_from_statistics(
    statistics: Iterable[float], levels: Sequence[float] = (0.05, 0.10), failures: int = 0
) -> BootstrapDistribution:
    """Sort replication statistics and attach the critical values at ``levels``."""
    values = np.sort(np.asarray(list(statistics), dtype=float))
    values.setflags(write=False)
    cvs = {float(a): critical_value(values, a) for a in levels}
    return BootstrapDistribution(values, cvs, failures, values.shape[0] + failures)


def estimate_restricted(Y, Z, C) -> RestrictedFit:
    """Least squares under ``C vec(D) = 0`` for a one-hot selector ``C``.

    Each equation is fitted by OLS after dropping its restricted regressors.
    ``leverages`` is ``n x T_eff``: the hat-matrix diagonal of the regressor
    set actually used by each equation.
    """
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    C = np.asarray(C, dtype=float).reshape(-1, Y.shape[0] * Z.shape[0])
    n, T = Y.shape
    q = Z.shape[0]
    if np.any((C != 0) & (C != 1)) or np.any(C.sum(axis=1) != 1):
        raise ValueError("restriction selector must have exactly one 1 per row")
    col, row = np.divmod(np.argmax(C, axis=1), n)
    D = np.zeros((n, q))
    V = np.empty((n, T))
    H = np.empty((n, T))
    for i in range(n):
        keep = np.setdiff1d(np.arange(q), col[row == i])
        Zi = Z[keep]
        if T <= keep.size:
            raise InsufficientObservations("too few observations for the restricted fit")
        inv, ok = _spd_inverse(Zi @ Zi.T)
        if not ok:
            raise SingularDesign(f"restricted regressors of equation {i} are singular")
        D[i, keep] = (Y[i] @ Zi.T) @ inv
        V[i] = Y[i] - D[i] @ Z
        H[i] = np.einsum("it,it->t", Zi, inv @ Zi)
    return RestrictedFit(D, V, H)


def adjust_residuals(residuals, leverages) -> np.ndarray:
    """Scale residuals by ``1 / sqrt(1 - h_t)``. Centering happens per draw."""
    r = np.asarray(residuals, dtype=float)
    h = np.asarray(leverages, dtype=float)
    if np.any(h < -1e-12) or np.any(h >= 1.0):
        raise LeverageOutOfRange("leverages must lie in [0, 1)")
    return r / np.sqrt(1.0 - np.clip(h, 0.0, None))


def _stream_key(master_seed: int, stream: Sequence[int]) -> np.ndarray:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(s) for s in stream))
    return ss.generate_state(2, dtype=np.uint64)


def replication_rng(master_seed: int, stream: Sequence[int], b: int) -> np.random.Generator:
    """Generator for replication ``b``; disjoint counter range per replication."""
    return _rng(_stream_key(master_seed, stream), b)


def _rng(key: np.ndarray, b: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, b]))


class _Simulator:
    """Everything needed to run a block of replications for one test."""

    def __init__(self, data: np.ndarray, spec: VarSpec, hyp: CausalityHypothesis) -> None:
        self.x = np.asarray(data, dtype=float)
        self.T, self.n = self.x.shape
        self.spec = spec
        Y, Z = assemble_regressors(self.x, spec)
        C = build_restriction(spec, hyp, self.n)
        self.pos = restricted_positions(spec, hyp, self.n)
        self.restricted = estimate_restricted(Y, Z, C)
        self.pool = adjust_residuals(self.restricted.residuals, self.restricted.leverages)
        self.T_eff = Y.shape[1]

    def draw_shocks(self, key: np.ndarray, start: int, stop: int) -> np.ndarray:
        """Centered resampled residual vectors, shape ``(stop - start, T_eff, n)``."""
        shocks = np.empty((stop - start, self.T_eff, self.n))
        for j, b in enumerate(range(start, stop)):
            draw = self.pool[:, _rng(key, b).integers(0, self.T_eff, size=self.T_eff)].T
            shocks[j] = draw - draw.mean(axis=0)
        return shocks

    def run(self, key: np.ndarray, start: int, stop: int) -> np.ndarray:
        m = stop - start
        n, T, k, T_eff = self.n, self.T, self.spec.lags, self.T_eff
        shocks = self.draw_shocks(key, start, stop)

        D = self.restricted.coefficients
        icpt = int(self.spec.include_intercept)
        const = D[:, 0] if icpt else np.zeros(n)
        lag_mats = [D[:, icpt + (L - 1) * n : icpt + L * n] for L in range(1, k + 1)]
        X = np.empty((m, T, n))
        X[:, :k] = self.x[:k]
        for t in range(k, T):
            xt = const + shocks[:, t - k]
            for L, B_L in enumerate(lag_mats, start=1):
                xt = xt + X[:, t - L] @ B_L.T
            X[:, t] = xt

        Ys = np.swapaxes(X[:, k:], 1, 2)
        blocks = [np.swapaxes(X[:, k - L : T - L], 1, 2) for L in range(1, k + 1)]
        if icpt:
            blocks.insert(0, np.ones((m, 1, T_eff)))
        Zs = np.concatenate(blocks, axis=1)
        Dh, _, sigma, zz_inv, ok = _ols(Ys, Zs)
        wald = _wald_batch(Dh, zz_inv, sigma, self.pos)
        return np.where(ok, wald, np.nan)


def run_bootstrap(
    data,
    spec: VarSpec,
    hyp: CausalityHypothesis,
    cfg: BootstrapConfig = BootstrapConfig(),
    stream: Sequence[int] = (),
) -> BootstrapDistribution:
    """Bootstrap distribution of the Wald statistic under the non-causality null.

    Pseudo-data are rebuilt recursively from the restricted coefficients,
    starting from the first ``p + d`` observed rows, with whole residual
    vectors resampled (so cross-equation correlation is kept) from the
    leverage-adjusted restricted residuals and mean-centered per draw. The
    unrestricted VAR is re-estimated on each pseudo-sample. Replications whose
    fit is singular are discarded and counted.
    """
    sim = _Simulator(np.asarray(data, dtype=float), spec, hyp)
    key = _stream_key(cfg.master_seed, stream)
    B = cfg.replications
    chunks = [(s, min(s + CHUNK_SIZE, B)) for s in range(0, B, CHUNK_SIZE)]
    workers = cfg.workers or os.cpu_count() or 1
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: sim.run(key, *c), chunks))
    else:
        parts = [sim.run(key, *c) for c in chunks]
    stats = np.concatenate(parts)
    good = np.isfinite(stats)
    failures = int(B - good.sum())
    if failures / B > MAX_FAILURE_RATE:
        raise TooManySingularReplications(
            f"{failures} of {B} bootstrap replications were singular"
        )
    return distribution_from_statistics(stats[good], cfg.significance_levels, failures)
