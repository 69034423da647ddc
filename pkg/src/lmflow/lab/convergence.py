"""Temporal self-convergence study.

No closed-form solution exists for Cahn-Hilliard, so each run is compared with
a reference run of the same scheme at ``min(dts) / ref_factor``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..schemes import MemorySink, RunConfig, run
from ..spectral import hk_seminorm, l2_norm
from .initial import initial_field


@dataclass
class ConvergenceReport:
    dts: list
    errors: list
    observed_orders: list
    reference_dt: float
    t_final: float
    scheme: str
    h4_errors: list = field(default_factory=list)
    # max |eta - 1| per dt over the steps after the first (root-solved steps only)
    eta_deviation: list = field(default_factory=list)
    eta_orders: list = field(default_factory=list)

    def format(self):
        lines = [
            f"# self-convergence of {self.scheme} at T={self.t_final:.6g} "
            f"against a reference run with dt={self.reference_dt:.6g}",
            "dt,l2_error,h4_error,max_eta_dev,order",
        ]
        for i, dt in enumerate(self.dts):
            order = "" if i == 0 else f"{self.observed_orders[i - 1]:.6f}"
            h4 = f"{self.h4_errors[i]:.6e}" if self.h4_errors else ""
            ed = f"{self.eta_deviation[i]:.6e}" if self.eta_deviation else ""
            lines.append(f"{dt:.6g},{self.errors[i]:.6e},{h4},{ed},{order}")
        return "\n".join(lines)


def _orders(dts, vals):
    return [
        math.log(vals[i] / vals[i + 1]) / math.log(dts[i] / dts[i + 1])
        for i in range(len(dts) - 1)
    ]


def _divides(t_final, dt):
    n = round(t_final / dt)
    return n >= 1 and abs(n * dt - t_final) <= 1e-9 * t_final


def convergence_study(cfg: RunConfig, dts, t_final, phi0=None, ref_factor=8, max_workers=None):
    """Run ``cfg`` at every step size in ``dts`` and at the reference step.

    Errors are ``||phi_dt(T) - phi_ref(T)||`` in L2 (and in the ``||Lap^2 e||``
    seminorm). Orders are ``log(e_i / e_{i+1}) / log(dt_i / dt_{i+1})``, which is
    the ``log2`` ratio for halving sequences. A failing reference run aborts
    the study.
    """
    dts = [float(d) for d in dts]
    if len(dts) < 2:
        raise ValueError("need at least two step sizes")
    if len(set(dts)) != len(dts):
        raise ValueError(f"duplicate step sizes in {dts}")
    if any(d <= 0 for d in dts):
        raise ValueError("step sizes must be positive")
    dts = sorted(dts, reverse=True)
    ref_dt = dts[-1] / ref_factor
    for d in dts + [ref_dt]:
        if not _divides(t_final, d):
            raise ValueError(f"dt={d!r} does not divide T={t_final!r}")

    if phi0 is None:
        phi0 = initial_field(cfg)
    grid = cfg.grid

    def go(dt):
        sink = MemorySink()
        state = run(cfg.with_(dt=dt, t_final=t_final), phi0, sink)
        devs = [abs(r.eta - 1.0) for r in sink.records[1:] if r.branch == "root-solved"]
        return state.phi_n, (max(devs) if devs else math.nan)

    ref_phi, _ = go(ref_dt)
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as ex:
            results = list(ex.map(go, dts))
    else:
        results = [go(d) for d in dts]

    errors = [l2_norm(grid, phi - ref_phi) for phi, _ in results]
    h4 = [hk_seminorm(grid, phi - ref_phi, 2) for phi, _ in results]
    eta_dev = [d for _, d in results]
    orders = _orders(dts, errors)
    eta_orders = _orders(dts, eta_dev) if all(np.isfinite(eta_dev)) and all(eta_dev) else []
    return ConvergenceReport(
        dts=dts,
        errors=errors,
        observed_orders=orders,
        reference_dt=ref_dt,
        t_final=t_final,
        scheme=cfg.scheme,
        h4_errors=h4,
        eta_deviation=eta_dev,
        eta_orders=eta_orders,
    )
