"""``dyncause`` command line: ``run``, ``static`` and ``window-size``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from dyncause.bootstrap import BootstrapConfig
from dyncause.causality import CausalityHypothesis
from dyncause.diagnostics import diagnose
from dyncause.dynamic import (
    DynamicConfig,
    analysis_length,
    build_schedule,
    min_window_size,
    prepare_system,
    run_dynamic,
    run_static,
)
from dyncause.exceptions import ConfigError, DyncauseError
from dyncause.report import (
    parse_csv,
    summary_text,
    write_diagnostics_csv,
    write_results_csv,
    write_svg,
)
from dyncause.transform import COMPONENT_PAIRS, Panel, TrendConfig, to_natural_log
from dyncause.var_engine import VarSpec, fit_var, max_feasible_lag, select_lag

log = logging.getLogger("dyncause")

TREND_FLAGS = {"none": "none", "drift": "drift", "drift-trend": "drift_and_trend"}


@dataclass
class RunConfig:
    input: str = ""
    cause: str = ""
    effect: str = ""
    components: str = "raw"
    trend: str = "drift-trend"
    pmax: int = 4
    d: int = 1
    scheme: str = "rolling"
    window: int | None = None
    lag_policy: str = "per_window"
    decompose: str = "full"
    alpha: tuple[float, ...] = (0.05, 0.10)
    reps: int = 10000
    seed: int = 0
    workers: int = 1
    log: bool = True
    initial_value: float = 0.0
    out: str = "dyncause_out"

    def validate(self) -> None:
        if not self.input:
            raise ConfigError("--input is required")
        if not self.cause or not self.effect:
            raise ConfigError("--cause and --effect are required")
        if self.cause == self.effect:
            raise ConfigError("--cause and --effect must name different columns")
        if self.components not in COMPONENT_PAIRS:
            raise ConfigError(f"--components must be one of {'|'.join(COMPONENT_PAIRS)}")
        if self.trend not in TREND_FLAGS:
            raise ConfigError(f"--trend must be one of {'|'.join(TREND_FLAGS)}")
        if self.scheme not in ("rolling", "recursive"):
            raise ConfigError("--scheme must be rolling or recursive")
        if self.lag_policy not in ("fixed", "per_window"):
            raise ConfigError("--lag-policy must be fixed or per_window")
        if self.decompose not in ("full", "per_window"):
            raise ConfigError("--decompose must be full or per_window")
        if self.pmax < 1 or self.d < 0:
            raise ConfigError("--pmax must be >= 1 and --d >= 0")
        if self.workers < 0:
            raise ConfigError("--workers must be >= 0 (0 means all cores)")
        try:
            BootstrapConfig(self.reps, self.alpha, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def dynamic_config(self) -> DynamicConfig:
        return DynamicConfig(
            p_max=self.pmax,
            d=self.d,
            lag_policy=self.lag_policy,
            trend=TrendConfig(TREND_FLAGS[self.trend], self.initial_value),
            decompose=self.decompose,
            workers=self.workers or None,
        )

    def bootstrap_config(self) -> BootstrapConfig:
        return BootstrapConfig(self.reps, self.alpha, self.seed, workers=self.workers or None)


def _parse_alpha(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(a) for a in text.split(",") if a.strip())
    except ValueError:
        raise ConfigError(f"cannot parse significance levels {text!r}") from None


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse {text!r} as a boolean")


_CONVERTERS = {
    "pmax": int, "d": int, "window": int, "reps": int, "seed": int, "workers": int,
    "initial_value": float, "alpha": _parse_alpha, "log": _parse_bool,
}


def load_config_file(path) -> dict[str, object]:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys are allowed."""
    known = {f.name for f in fields(RunConfig)}
    out: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONVERTERS.get(key, str)(value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--input")
    p.add_argument("--cause")
    p.add_argument("--effect")
    p.add_argument("--components", choices=COMPONENT_PAIRS)
    p.add_argument("--trend", choices=tuple(TREND_FLAGS))
    p.add_argument("--pmax", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--lag-policy", dest="lag_policy", choices=("fixed", "per_window"))
    p.add_argument("--reps", type=int)
    p.add_argument("--alpha", type=_parse_alpha)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="threads for bootstrap/windows (0 = all cores)")
    p.add_argument("--log", dest="log", action="store_true", default=None,
                   help="take natural logs of the input (default)")
    p.add_argument("--no-log", dest="log", action="store_false")
    p.add_argument("--initial-value", dest="initial_value", type=float)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyncause", description="Dynamic symmetric and asymmetric Granger-causality tests"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="rolling or recursive subsample scan")
    _add_common(run_p)
    run_p.add_argument("--scheme", choices=("rolling", "recursive"))
    run_p.add_argument("--window", type=int, help="override the minimum window length")
    run_p.add_argument("--decompose", choices=("full", "per_window"))
    static_p = sub.add_parser("static", help="single full-sample test")
    _add_common(static_p)
    ws = sub.add_parser("window-size", help="print the minimum subsample size for T observations")
    ws.add_argument("--t", type=int, required=True)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values: dict[str, object] = {}
    if getattr(ns, "config", None):
        values.update(load_config_file(ns.config))
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    cfg.alpha = tuple(cfg.alpha)
    cfg.validate()
    return cfg


def load_panel(cfg: RunConfig) -> tuple[Panel, CausalityHypothesis]:
    panel = parse_csv(cfg.input)
    for name in (cfg.cause, cfg.effect):
        if name not in panel.names:
            raise ConfigError(f"column {name!r} not in input; have {', '.join(panel.names)}")
    panel = panel.select([cfg.effect, cfg.cause])
    if cfg.log:
        panel = to_natural_log(panel)
    return panel, CausalityHypothesis(cause=1, effect=0, component_pair=cfg.components)


def diagnostics_rows(panel: Panel, hyp: CausalityHypothesis, dcfg: DynamicConfig):
    """Diagnostic rows for the raw levels, the positive pair and the negative pair of the full sample."""
    rows = []
    for pair, label in (("raw", "[{e}, {c}]"), ("pos", "[{e}+, {c}+]"), ("neg", "[{e}-, {c}-]")):
        name = label.format(e=panel.names[hyp.effect], c=panel.names[hyp.cause])
        try:
            system, _ = prepare_system(panel, CausalityHypothesis(hyp.cause, hyp.effect, pair), dcfg.trend)
            x = system.values
            cap = max_feasible_lag(x.shape[0], x.shape[1], dcfg.d)
            p, _ = select_lag(x, min(dcfg.p_max, cap), dcfg.d)
            rows.append((name, diagnose(fit_var(x, VarSpec(p=p, d=dcfg.d)))))
        except (DyncauseError, ValueError) as exc:
            rows.append((name, f"failed: {exc}"))
    return rows


def _header(cfg: RunConfig, panel: Panel) -> list[str]:
    lines = [
        f"dyncause run: H0 = {cfg.cause} does not Granger-cause {cfg.effect}",
        f"components={cfg.components} trend={cfg.trend} log={cfg.log} pmax={cfg.pmax} d={cfg.d} "
        f"lag_policy={cfg.lag_policy} decompose={cfg.decompose} reps={cfg.reps} seed={cfg.seed} "
        f"alpha={','.join(f'{a:g}' for a in cfg.alpha)}",
        f"input: {cfg.input} ({panel.nobs} observations)",
    ]
    if cfg.components != "raw":
        lines.append(
            "note: component series start at the second date (first differences lose one observation); "
            "window indices refer to the differenced sample"
        )
    return lines


def run(cfg: RunConfig) -> int:
    panel, hyp = load_panel(cfg)
    dcfg, bcfg = cfg.dynamic_config(), cfg.bootstrap_config()
    T = analysis_length(panel, hyp, dcfg)
    schedule = build_schedule(T, cfg.scheme, cfg.window)
    log.info("running %d %s windows of minimum length %d", len(schedule), schedule.scheme, schedule.S)
    series = run_dynamic(panel, hyp, dcfg, bcfg, schedule)
    diag = diagnostics_rows(panel, hyp, dcfg)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(series, out / "dynamic_results.csv")
    write_diagnostics_csv(diag, out / "diagnostics.csv")
    write_svg(series, out / "tvpcv.svg", title=f"TVpCV: {cfg.cause} -> {cfg.effect} ({cfg.components})")
    (out / "summary.txt").write_text(summary_text(series, _header(cfg, panel)), encoding="utf-8")
    print(f"wrote {len(series)} windows to {out}")
    return 0


def static(cfg: RunConfig) -> int:
    panel, hyp = load_panel(cfg)
    rec = run_static(panel, hyp, cfg.dynamic_config(), cfg.bootstrap_config())
    if rec.p_star is None or not rec.cv:
        raise DyncauseError(rec.status)
    print(f"H0: {cfg.cause} does not Granger-cause {cfg.effect} ({cfg.components})")
    print(f"sample: {rec.start_date} .. {rec.end_date}; p* = {rec.p_star}; d = {cfg.d}")
    print(f"Wald = {rec.wald:.6f}; asymptotic p-value = {rec.p_asymptotic:.6f}")
    for a in cfg.alpha:
        verdict = "reject" if rec.rejects(a) else "accept"
        print(f"{a * 100:g}%: bootstrap cv = {rec.cv[a]:.6f}; TVpCV = {rec.tvpcv[a]:.6f}; {verdict}")
    if rec.status != "ok":
        print(f"status: {rec.status}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        if ns.command == "window-size":
            print(min_window_size(ns.t))
            return 0
        cfg = config_from_args(ns)
        return run(cfg) if ns.command == "run" else static(cfg)
    except (DyncauseError, ValueError, OSError) as exc:
        print(f"dyncause: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
