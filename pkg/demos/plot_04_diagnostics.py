"""
Residual diagnostics
====================

The asymptotic chi-square test relies on normal, homoskedastic errors. The
three residual checks below flag when the bootstrap should be preferred.
"""

import numpy as np

from dyncause import VarSpec, diagnose, fit_var
from dyncause.simulate import arch_errors, gaussian_errors, simulate_var

A = np.array([[0.4, 0.1], [0.0, 0.5]])
spec = VarSpec(p=1, d=1)

###############################################################################
# Gaussian errors should usually pass. ARCH errors have fat tails and
# clustered volatility, so both the normality and the ARCH checks react.

for label, errors in (("gaussian", gaussian_errors), ("ARCH(1)", arch_errors(0.6))):
    rng = np.random.default_rng(9)
    fit = fit_var(simulate_var([A], 300, rng, errors=errors), spec)
    rep = diagnose(fit)
    print(f"{label:9s} normality p={rep.normality_pvalue:.3f}  ARCH p={rep.arch_pvalue:.3f}  "
          f"autocorrelation p={rep.autocorrelation_pvalue:.3f}  -> {rep.advisory}")
