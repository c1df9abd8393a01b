"""
Positive and negative partial sums
==================================

A log price series is split into two cumulative components. One collects
only the positive shocks and the other only the negative ones. Each also
carries half of the deterministic drift, so the two always add back up to
the original path.
"""

import numpy as np

from dyncause import TrendConfig, build_partial_sums

rng = np.random.default_rng(2)
log_price = np.cumsum(0.02 + 0.1 * rng.standard_normal(31))

###############################################################################
# Fit a drift and a linear trend on the first differences, then cumulate the
# positive and negative residuals separately.

comp = build_partial_sums(log_price, TrendConfig("drift_and_trend"))
print(f"drift {comp.drift_hat:.4f}, trend {comp.trend_hat:.5f}")

###############################################################################
# The differenced sample is one observation shorter. With the default x0 = 0
# the components add up to the change since the first observation.

gap = comp.positive + comp.negative - (log_price[1:] - log_price[0])
print("largest reconstruction gap:", np.abs(gap).max())

###############################################################################
# Net of the deterministic share, the positive component can only rise and the
# negative one can only fall.

up = comp.positive - comp.deterministic_share
down = comp.negative - comp.deterministic_share
print("positive part non-decreasing:", bool(np.all(np.diff(up) >= -1e-12)))
print("negative part non-increasing:", bool(np.all(np.diff(down) <= 1e-12)))

for t in range(0, 30, 6):
    print(f"t={t + 1:2d}  level {log_price[t + 1] - log_price[0]:+.3f}  "
          f"positive {comp.positive[t]:+.3f}  negative {comp.negative[t]:+.3f}")
