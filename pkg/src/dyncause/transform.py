"""Log transform, drift/trend removal and cumulative partial-sum components.

A level series ``x`` with first differences ``dx[t] = a + b*t + e[t]`` is split
into a positive and a negative component

    x_pos[t] = (a*t + b*t*(t+1)/2 + x0) / 2 + cumsum(max(e, 0))[t]
    x_neg[t] = (a*t + b*t*(t+1)/2 + x0) / 2 + cumsum(min(e, 0))[t]

for ``t = 1, ..., T-1`` (the differenced sample), so that ``x_pos + x_neg``
reproduces the level path shifted to start from ``x0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from dyncause.exceptions import InsufficientObservations, NonPositiveValue, SingularDesign

TrendMode = Literal["none", "drift", "drift_and_trend"]
ComponentPair = Literal["raw", "pos", "neg", "pos-neg", "neg-pos"]

TREND_MODES: tuple[str, ...] = ("none", "drift", "drift_and_trend")
COMPONENT_PAIRS: tuple[str, ...] = ("raw", "pos", "neg", "pos-neg", "neg-pos")


@dataclass(frozen=True)
class Panel:
    """Dated multivariate series: ``values`` is T x n, one column per name."""

    dates: tuple
    names: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a T x n matrix")
        if values.shape != (len(self.dates), len(self.names)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.names)} names"
            )
        if values.shape[0] < 2:
            raise InsufficientObservations("a panel needs at least 2 observations")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains missing or non-finite values")
        if any(not (a < b) for a, b in zip(self.dates[:-1], self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        values.setflags(write=False)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    @property
    def nobs(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise KeyError(f"unknown column {name!r}; have {list(self.names)}") from None

    def select(self, names: Sequence[str]) -> "Panel":
        cols = np.column_stack([self.column(n) for n in names])
        return Panel(self.dates, tuple(names), cols)


@dataclass(frozen=True)
class TrendConfig:
    mode: TrendMode = "drift_and_trend"
    initial_value: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in TREND_MODES:
            raise ValueError(f"trend mode must be one of {TREND_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class ComponentSeries:
    """Cumulative positive/negative parts of one series over the differenced sample."""

    positive: np.ndarray
    negative: np.ndarray
    deterministic_share: np.ndarray
    drift_hat: float
    trend_hat: float
    positive_shocks: np.ndarray
    negative_shocks: np.ndarray

    @property
    def level(self) -> np.ndarray:
        return self.positive + self.negative


def to_natural_log(panel: Panel) -> Panel:
    """Element-wise natural log; raises :class:`NonPositiveValue` on any value <= 0."""
    bad = np.argwhere(panel.values <= 0)
    if bad.size:
        row, col = (int(i) for i in bad[0])
        raise NonPositiveValue(row, col, float(panel.values[row, col]))
    return Panel(panel.dates, panel.names, np.log(panel.values))


def fit_drift_trend(series, cfg: TrendConfig = TrendConfig()) -> tuple[float, float, np.ndarray]:
    """OLS of first differences on ``(1, t)``, ``t = 1..T-1``, per the trend mode.

    Returns
    -------
    drift_hat, trend_hat : float
        Zero for the regressors excluded by ``cfg.mode``.
    residuals : ndarray
        Length T-1 vector ``dx[t] - drift_hat - trend_hat * t``.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    T = x.shape[0]
    dx = np.diff(x)
    if cfg.mode == "none":
        if T < 2:
            raise InsufficientObservations("need at least 2 observations")
        return 0.0, 0.0, dx
    if cfg.mode == "drift":
        if T < 2:
            raise InsufficientObservations("drift mode needs at least 2 observations")
        a = float(dx.mean())
        return a, 0.0, dx - a
    if T < 3:
        raise InsufficientObservations("drift_and_trend mode needs at least 3 observations")
    t = np.arange(1, T, dtype=float)
    m = float(T - 1)
    st, stt = t.sum(), t @ t
    sy, sty = dx.sum(), t @ dx
    det = m * stt - st * st
    if not det > 0:
        raise SingularDesign("drift/trend normal equations are singular")
    a = (stt * sy - st * sty) / det
    b = (m * sty - st * sy) / det
    return float(a), float(b), dx - a - b * t


def split_shocks(residuals) -> tuple[np.ndarray, np.ndarray]:
    e = np.asarray(residuals, dtype=float)
    return np.maximum(e, 0.0), np.minimum(e, 0.0)


def build_partial_sums(series, cfg: TrendConfig = TrendConfig()) -> ComponentSeries:
    """Decompose a level series into cumulative positive and negative components.

    The output has length T-1: index ``i`` corresponds to ``t = i + 1`` of the
    differenced sample. ``positive + negative`` equals
    ``series[1:] - series[0] + cfg.initial_value``.
    """
    a, b, eps = fit_drift_trend(series, cfg)
    pos_shock, neg_shock = split_shocks(eps)
    t = np.arange(1, eps.shape[0] + 1, dtype=float)
    share = (a * t + 0.5 * t * (t + 1.0) * b + cfg.initial_value) / 2.0
    return ComponentSeries(
        positive=share + np.cumsum(pos_shock),
        negative=share + np.cumsum(neg_shock),
        deterministic_share=share,
        drift_hat=a,
        trend_hat=b,
        positive_shocks=pos_shock,
        negative_shocks=neg_shock,
    )


def component_panel(
    panel: Panel,
    cause: str,
    effect: str,
    pair: ComponentPair = "raw",
    cfg: TrendConfig = TrendConfig(),
) -> Panel:
    """Two-column panel ``[effect, cause]`` in the requested component form.

    ``pair`` names the cause component first: ``"pos-neg"`` pairs the cause's
    positive part with the effect's negative part. ``"raw"`` returns the
    levels untouched (T rows); every other pair loses the first date to
    differencing (T-1 rows).
    """
    if pair not in COMPONENT_PAIRS:
        raise ValueError(f"component pair must be one of {COMPONENT_PAIRS}, got {pair!r}")
    if cause == effect:
        raise ValueError("cause and effect must be different columns")
    if pair == "raw":
        return panel.select([effect, cause])
    cause_sign, effect_sign = {
        "pos": ("+", "+"),
        "neg": ("-", "-"),
        "pos-neg": ("+", "-"),
        "neg-pos": ("-", "+"),
    }[pair]

    def pick(name: str, sign: str) -> np.ndarray:
        comp = build_partial_sums(panel.column(name), cfg)
        return comp.positive if sign == "+" else comp.negative

    values = np.column_stack([pick(effect, effect_sign), pick(cause, cause_sign)])
    names = (f"{effect}{effect_sign}", f"{cause}{cause_sign}")
    return Panel(panel.dates[1:], names, values)
