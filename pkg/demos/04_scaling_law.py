"""How the selected window grows with the series length.

For a drift of smoothness 1 the bias-variance balance puts the best window
at a constant times T^(2/3). This demo simulates a log-volatility bump train
whose bump width grows like T^(2/3), selects m* on each replicate, and
regresses log m* on log T with heteroskedasticity-robust (HC1) errors.

It also tabulates the closed-form bound to show the same U-shape in m.

Run with ``python3 demos/04_scaling_law.py`` (about twenty seconds).
"""

from __future__ import annotations

import numpy as np

from rocp import ExperimentConfig, ModelSpec, ProcessFamily, run_scaling_experiment, scaling_regression
from rocp.series import SplitSpec
from rocp.theory import BoundParams, coverage_bound, optimal_bound_window

cfg = ExperimentConfig(
    T_grid=(300, 600, 1200, 2400, 4800),
    family=ProcessFamily("pure_scale", {"path": "bumps"}, {"width": 2.0, "amplitude": 20.0}),
    model=ModelSpec("ar", 2),
    n_reps=10,
    split=SplitSpec(0.6, 0.4),
    min_train=30,
)
rows = run_scaling_experiment(cfg)
for T in cfg.T_grid:
    ms = [r.m_star for r in rows if r.T == T]
    print(f"T={T:>5}: median m*={int(np.median(ms)):>4}  (T^(2/3)={T ** (2 / 3):.0f})")

res = scaling_regression(rows)
lo, hi = res.ci95
print(f"\nlog m* = {res.intercepts['all']:.2f} + {res.slope:.3f} log T,  95% CI [{lo:.3f}, {hi:.3f}], n={res.n}")

T = 4800
params = BoundParams(f_bar=1.0, f_under=1.0, A_inf=0.5, L=2.0, C_star=0.5)
m = np.array([10, 50, 100, 200, 400, 800, 1600, 3200])
print(f"\ncoverage-error bound at T={T}:")
for mm, b in zip(m, coverage_bound(m, T, 1.0, params)):
    print(f"  m={mm:>5}  {b:.4f}")
print(f"minimised at m={optimal_bound_window(T, 1.0, params)}")
