"""Temporal self-convergence of the original multiplier scheme.

Smooth data (two cosine modes on top of mean 0.3) keeps the multiplier
equation solvable, so the scheme's second order in time and the
``|eta - 1| = O(dt^2)`` behaviour show up cleanly.
"""

# %%
from lmflow import RunConfig, cahn_hilliard
from lmflow.lab import convergence_study

cfg = RunConfig(
    flow=cahn_hilliard(0.06),
    nx=64,
    ny=64,
    dt=8e-4,
    t_final=0.0104,
    scheme="original-lm",
    init="modes:1:0,0:2",
    mean=0.3,
    amp=1e-3,
)
report = convergence_study(cfg, [8e-4, 4e-4, 2e-4], cfg.t_final, max_workers=3)
print(report.format())

# %%
print("L2 orders:   ", [round(o, 3) for o in report.observed_orders])
print("|eta-1| orders:", [round(o, 3) for o in report.eta_orders])
