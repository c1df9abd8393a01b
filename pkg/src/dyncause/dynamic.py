"""Rolling and recursive subsample causality scans with TVpCV ratios.

TVpCV is the test value divided by the bootstrap critical value of the same
subsample; a ratio above one means non-causality is rejected at that level.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from dyncause.bootstrap import BootstrapConfig, run_bootstrap
from dyncause.causality import CausalityHypothesis, build_restriction, wald_statistic
from dyncause.exceptions import DyncauseError, NonPositiveCriticalValue, WindowExceedsSample
from dyncause.transform import Panel, TrendConfig, component_panel
from dyncause.var_engine import VarSpec, fit_var, max_feasible_lag, select_lag

Scheme = Literal["rolling", "recursive"]


def min_window_size(T: int) -> int:
    """Smallest subsample length ``ceil(T * (0.01 + 1.8 / sqrt(T)))``."""
    if T < 10:
        raise ValueError(f"window sizing needs T >= 10, got {T}")
    # round first so that exact integers (e.g. T=100 -> 19) are not bumped up by fp noise
    S = math.ceil(round(T * (0.01 + 1.8 / math.sqrt(T)), 9))
    if S > T:
        raise WindowExceedsSample(f"minimum window {S} exceeds sample size {T}")
    return S


@dataclass(frozen=True)
class WindowSchedule:
    """Windows as 1-based inclusive ``(start, end)`` pairs."""

    scheme: str
    S: int
    windows: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.windows)


def build_schedule(T: int, scheme: Scheme = "rolling", S_override: int | None = None) -> WindowSchedule:
    if scheme not in ("rolling", "recursive"):
        raise ValueError(f"scheme must be 'rolling' or 'recursive', got {scheme!r}")
    S = min_window_size(T) if S_override is None else int(S_override)
    if S > T:
        raise WindowExceedsSample(f"window length {S} exceeds sample size {T}")
    if S < 1:
        raise ValueError("window length must be positive")
    if scheme == "rolling":
        windows = tuple((s, s + S - 1) for s in range(1, T - S + 2))
    else:
        windows = tuple((1, e) for e in range(S, T + 1))
    return WindowSchedule(scheme, S, windows)


def tvpcv(wald: float, cv: float) -> float:
    if not cv > 0:
        raise NonPositiveCriticalValue(f"critical value {cv!r} is not positive")
    return wald / cv


@dataclass(frozen=True)
class DynamicConfig:
    p_max: int = 4
    d: int = 1
    include_intercept: bool = True
    lag_policy: Literal["fixed", "per_window"] = "per_window"
    trend: TrendConfig = TrendConfig()
    decompose: Literal["full", "per_window"] = "full"
    workers: int | None = 1

    def __post_init__(self) -> None:
        if self.p_max < 1:
            raise ValueError("p_max must be >= 1")
        if self.d < 0:
            raise ValueError("d must be >= 0")
        if self.lag_policy not in ("fixed", "per_window"):
            raise ValueError(f"lag_policy must be 'fixed' or 'per_window', got {self.lag_policy!r}")
        if self.decompose not in ("full", "per_window"):
            raise ValueError(f"decompose must be 'full' or 'per_window', got {self.decompose!r}")


@dataclass
class WindowRecord:
    ssp_index: int
    start: int
    end: int
    start_date: object = None
    end_date: object = None
    p_star: int | None = None
    p_max_used: int | None = None
    wald: float = math.nan
    cv: dict[float, float] = field(default_factory=dict)
    tvpcv: dict[float, float] = field(default_factory=dict)
    p_asymptotic: float = math.nan
    failures: int = 0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def rejects(self, alpha: float) -> bool:
        """Strict rule: reject when the Wald value exceeds the critical value."""
        return self.ok and self.wald > self.cv.get(alpha, math.inf)


@dataclass(frozen=True)
class TvpcvSeries:
    scheme: str
    S: int
    levels: tuple[float, ...]
    records: tuple[WindowRecord, ...]
    nobs: int

    def __len__(self) -> int:
        return len(self.records)

    def ratios(self, alpha: float) -> np.ndarray:
        return np.array([r.tvpcv.get(alpha, math.nan) for r in self.records])


def prepare_system(panel: Panel, hyp: CausalityHypothesis, trend: TrendConfig) -> tuple[Panel, CausalityHypothesis]:
    """Data matrix for the VAR and the hypothesis re-indexed onto it.

    ``raw`` keeps every column of ``panel``. Component pairs produce a
    two-column system ``[effect component, cause component]`` over the
    differenced sample.
    """
    hyp.validate(len(panel.names))
    if hyp.component_pair == "raw":
        return panel, hyp
    system = component_panel(
        panel, panel.names[hyp.cause], panel.names[hyp.effect], hyp.component_pair, trend
    )
    return system, CausalityHypothesis(cause=1, effect=0, component_pair=hyp.component_pair)


def analysis_length(panel: Panel, hyp: CausalityHypothesis, cfg: DynamicConfig = DynamicConfig()) -> int:
    """Number of observations the window schedule should span."""
    if cfg.decompose == "per_window" or hyp.component_pair == "raw":
        return panel.nobs
    return panel.nobs - 1


def run_window(
    data,
    hyp: CausalityHypothesis,
    cfg: DynamicConfig,
    boot: BootstrapConfig,
    stream: Sequence[int] = (0,),
    p_fixed: int | None = None,
) -> WindowRecord:
    """Full static test (lag choice, Wald, bootstrap, TVpCV) on one data matrix.

    Errors are caught and reported through ``status``.
    """
    x = np.asarray(data, dtype=float)
    T, n = x.shape
    rec = WindowRecord(ssp_index=0, start=1, end=T)
    try:
        cap = max_feasible_lag(T, n, cfg.d, cfg.include_intercept)
        if cap < 1:
            raise WindowExceedsSample(f"{T} observations cannot support a VAR with d={cfg.d}")
        rec.p_max_used = min(cfg.p_max, cap)
        if p_fixed is not None:
            p = min(p_fixed, cap)
        else:
            p, _ = select_lag(x, rec.p_max_used, cfg.d, cfg.include_intercept)
        rec.p_star = p
        spec = VarSpec(p=p, d=cfg.d, include_intercept=cfg.include_intercept)
        fit = fit_var(x, spec)
        outcome = wald_statistic(fit, build_restriction(spec, hyp, n))
        rec.wald = outcome.statistic
        rec.p_asymptotic = outcome.asymptotic_pvalue
        dist = run_bootstrap(x, spec, hyp, boot, stream)
        rec.failures = dist.failures
        rec.cv = dict(dist.critical_values)
        bad = []
        for alpha, cv in rec.cv.items():
            try:
                rec.tvpcv[alpha] = tvpcv(rec.wald, cv)
            except NonPositiveCriticalValue:
                rec.tvpcv[alpha] = math.nan
                bad.append(alpha)
        if bad:
            rec.status = "nonpositive_cv@" + "/".join(f"{a:g}" for a in bad)
    except DyncauseError as exc:
        rec.status = f"failed: {exc}"
    return rec


def run_dynamic(
    panel: Panel,
    hyp: CausalityHypothesis,
    cfg: DynamicConfig,
    boot: BootstrapConfig,
    schedule: WindowSchedule,
) -> TvpcvSeries:
    """Run the test on every window of ``schedule``.

    With ``decompose="full"`` the components are built once on the whole
    sample and ``schedule`` indexes that transformed sample (see
    :func:`analysis_length`). Window ``i`` (0-based) bootstraps on stream
    ``(i,)`` of ``boot.master_seed``.
    """
    if cfg.decompose == "full":
        system, inner = prepare_system(panel, hyp, cfg.trend)
    else:
        system, inner = panel, hyp
    if schedule.windows and schedule.windows[-1][1] > system.nobs:
        raise WindowExceedsSample(
            f"schedule reaches observation {schedule.windows[-1][1]} but the sample has {system.nobs}"
        )

    p_fixed = None
    if cfg.lag_policy == "fixed":
        full = system if cfg.decompose == "full" else prepare_system(panel, hyp, cfg.trend)[0]
        cap = max_feasible_lag(full.nobs, len(full.names), cfg.d, cfg.include_intercept)
        p_fixed, _ = select_lag(full.values, min(cfg.p_max, cap), cfg.d, cfg.include_intercept)

    workers = cfg.workers or os.cpu_count() or 1
    inner_boot = replace(boot, workers=1) if workers > 1 else boot

    def one(i: int) -> WindowRecord:
        start, end = schedule.windows[i]
        if cfg.decompose == "full":
            sub, h, dates = system.values[start - 1 : end], inner, system.dates
        else:
            window = Panel(panel.dates[start - 1 : end], panel.names, panel.values[start - 1 : end])
            sub_panel, h = prepare_system(window, hyp, cfg.trend)
            sub, dates = sub_panel.values, panel.dates
        rec = run_window(sub, h, cfg, inner_boot, stream=(i,), p_fixed=p_fixed)
        rec.ssp_index, rec.start, rec.end = i + 1, start, end
        rec.start_date, rec.end_date = dates[start - 1], dates[end - 1]
        return rec

    idx = range(len(schedule.windows))
    if workers > 1 and len(schedule.windows) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, idx))
    else:
        records = [one(i) for i in idx]
    return TvpcvSeries(schedule.scheme, schedule.S, boot.significance_levels, tuple(records), system.nobs)


def run_static(
    panel: Panel,
    hyp: CausalityHypothesis,
    cfg: DynamicConfig = DynamicConfig(),
    boot: BootstrapConfig = BootstrapConfig(),
    stream: Sequence[int] = (0,),
) -> WindowRecord:
    """Single full-sample test. Pass ``stream=(i,)`` to reproduce window ``i`` of a scan."""
    system, inner = prepare_system(panel, hyp, cfg.trend)
    p_fixed = None
    if cfg.lag_policy == "fixed":
        cap = max_feasible_lag(system.nobs, len(system.names), cfg.d, cfg.include_intercept)
        p_fixed, _ = select_lag(system.values, min(cfg.p_max, cap), cfg.d, cfg.include_intercept)
    rec = run_window(system.values, inner, cfg, boot, stream=stream, p_fixed=p_fixed)
    rec.ssp_index, rec.start, rec.end = 1, 1, system.nobs
    rec.start_date, rec.end_date = system.dates[0], system.dates[-1]
    return rec
