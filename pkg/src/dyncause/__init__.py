"""Dynamic symmetric and asymmetric Granger-causality testing.

Typical use::

    from dyncause import Panel, CausalityHypothesis, DynamicConfig, BootstrapConfig
    from dyncause import analysis_length, build_schedule, run_dynamic

    hyp = CausalityHypothesis(cause=1, effect=0, component_pair="pos")
    schedule = build_schedule(analysis_length(panel, hyp), "rolling")
    series = run_dynamic(panel, hyp, DynamicConfig(), BootstrapConfig(), schedule)
"""
from dyncause.bootstrap import (
    BootstrapConfig,
    BootstrapDistribution,
    adjust_residuals,
    critical_value,
    distribution_from_statistics,
    estimate_restricted,
    run_bootstrap,
)
from dyncause.causality import (
    CausalityHypothesis,
    WaldOutcome,
    build_restriction,
    chi_square_upper_tail,
    wald_statistic,
)
from dyncause.diagnostics import DiagnosticsReport, diagnose
from dyncause.dynamic import (
    DynamicConfig,
    TvpcvSeries,
    WindowRecord,
    WindowSchedule,
    analysis_length,
    build_schedule,
    min_window_size,
    run_dynamic,
    run_static,
    tvpcv,
)
from dyncause.exceptions import DyncauseError
from dyncause.transform import (
    ComponentSeries,
    Panel,
    TrendConfig,
    build_partial_sums,
    component_panel,
    fit_drift_trend,
    split_shocks,
    to_natural_log,
)
from dyncause.var_engine import VarFit, VarSpec, assemble_regressors, estimate_var, fit_var, hjc, select_lag

__version__ = "0.1.0"
