"""Scalar multiplier equation of the Lagrange multiplier schemes.

Each step writes the update as ``phi_next = p + eta * dt * q`` where ``p`` and
``q`` come from two resolvent solves with ``(I + 3/4 dt GL)``. Substituting
into the discrete energy constraint

    (F(phi_next) - F(phi_n), 1) = eta * (F'(phi_star), phi_next - phi_n)

gives a scalar equation ``g(eta) = 0``. For the quartic double well ``g`` is
itself a quartic polynomial in ``eta``; its coefficients are assembled once
per step and the root is found by a bracketed Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import FlowSpec, bulk_energy_change, potential_F, potential_Fprime
from .spectral import Grid, check_field

__all__ = [
    "QuarticPoly",
    "EtaSolveReport",
    "MultiplierError",
    "SolvabilityFailure",
    "DegenerateEquation",
    "compute_p",
    "compute_q",
    "assemble_g",
    "g_direct",
    "eval_g",
    "eval_g_prime",
    "solve_eta",
    "eta_bracket",
    "gate_metric",
    "sn_proxy",
    "energy_scale",
]


class MultiplierError(RuntimeError):
    """The multiplier equation could not be solved in the admissible bracket.

    ``step`` and ``t`` are filled in by the time loop when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
        self.step = None
        self.t = None

    def __str__(self):
        msg = super().__str__()
        if self.step is not None:
            msg = f"step {self.step} (t={self.t:.17g}): {msg}"
        return msg


class SolvabilityFailure(MultiplierError):
    pass


class DegenerateEquation(MultiplierError):
    pass


@dataclass(frozen=True)
class QuarticPoly:
    """``g(eta) = c0 + c1 eta + c2 eta**2 + c3 eta**3 + c4 eta**4``."""

    c0: float
    c1: float
    c2: float
    c3: float
    c4: float

    @property
    def coeffs(self):
        return (self.c0, self.c1, self.c2, self.c3, self.c4)

    @property
    def scale(self):
        return sum(abs(c) for c in self.coeffs) + 1e-300

    def __call__(self, eta):
        return eval_g(self, eta)

    def derivative(self, eta):
        return eval_g_prime(self, eta)


def eval_g(poly: QuarticPoly, eta):
    return (((poly.c4 * eta + poly.c3) * eta + poly.c2) * eta + poly.c1) * eta + poly.c0


def eval_g_prime(poly: QuarticPoly, eta):
    return ((4.0 * poly.c4 * eta + 3.0 * poly.c3) * eta + 2.0 * poly.c2) * eta + poly.c1


def _fft_field(grid, f):
    return np.fft.rfft2(check_field(grid, f))


def compute_p(grid: Grid, phi_n, phi_nm1, flow: FlowSpec, dt) -> np.ndarray:
    """``p = (I + 3/4 dt GL)^{-1} (phi_n - 1/4 dt GL phi_nm1)``.

    Evaluated in the equivalent increment form
    ``p = phi_n - dt (I + 3/4 dt GL)^{-1} GL (3/4 phi_n + 1/4 phi_nm1)`` so that
    the increment ``p - phi_n`` carries no cancellation error.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    phi_n = check_field(grid, phi_n)
    gl = flow.sigma_GL(grid)
    avg = _fft_field(grid, 0.75 * phi_n + 0.25 * check_field(grid, phi_nm1))
    inc = np.fft.irfft2(-dt * gl * avg / (1.0 + 0.75 * dt * gl), s=grid.shape)
    return phi_n + inc


def compute_q(grid: Grid, phi_star, flow: FlowSpec, dt) -> np.ndarray:
    """``q = -(I + 3/4 dt GL)^{-1} G F'(phi_star)``.

    For Cahn-Hilliard this is ``(I + 3/4 eps2 dt Lap^2)^{-1} Lap F'(phi_star)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    W = _fft_field(grid, potential_Fprime(check_field(grid, phi_star)))
    if flow.dealias:
        W = W * grid.dealias_mask
    gl = flow.sigma_GL(grid)
    return np.fft.irfft2(-flow.sigma_G(grid) * W / (1.0 + 0.75 * dt * gl), s=grid.shape)


def assemble_g(grid: Grid, p, q, phi_n, phi_star, dt) -> QuarticPoly:
    """Exact quartic coefficients of ``g`` for the double-well potential.

    With ``s = dt q``, ``r = p - phi_n`` and ``w = F'(phi_star)``::

        c0 = (F(p) - F(phi_n), 1)
        c1 = ((p**3 - p) s - w r, 1)
        c2 = ((3/2 p**2 - 1/2) s**2 - w s, 1)
        c3 = (p s**3, 1)
        c4 = (s**4, 1) / 4
    """
    p = check_field(grid, p)
    phi_n = check_field(grid, phi_n)
    s = dt * check_field(grid, q)
    r = p - phi_n
    w = potential_Fprime(check_field(grid, phi_star))
    h = grid.cell_area
    s2 = s * s
    c0 = bulk_energy_change(grid, p, phi_n)
    c1 = float(np.sum((p * p * p - p) * s - w * r)) * h
    c2 = float(np.sum((1.5 * p * p - 0.5) * s2 - w * s)) * h
    c3 = float(np.sum(p * s2 * s)) * h
    c4 = 0.25 * float(np.sum(s2 * s2)) * h
    return QuarticPoly(c0, c1, c2, c3, c4)


def g_direct(grid: Grid, p, q, phi_n, phi_star, dt, eta) -> float:
    """Quadrature of ``g(eta)`` straight from its definition (no expansion)."""
    phi = check_field(grid, p) + eta * dt * check_field(grid, q)
    phi_n = check_field(grid, phi_n)
    w = potential_Fprime(check_field(grid, phi_star))
    integrand = potential_F(phi) - potential_F(phi_n) - eta * w * (phi - phi_n)
    return float(np.sum(integrand)) * grid.cell_area


def energy_scale(grid: Grid, phi) -> float:
    """Size of a field in energy units, ``|Omega| + (phi**4, 1)``."""
    phi = check_field(grid, phi)
    return grid.area + float(np.sum(phi**4)) * grid.cell_area


@dataclass(frozen=True)
class EtaSolveReport:
    eta: float
    residual: float
    iterations: int
    bracket_lo: float
    bracket_hi: float
    method: str
    degenerate: bool = False
    converged: bool = True


def eta_bracket(dt, widen=1.0):
    """Admissible interval ``[1 - widen sqrt(dt), 1 + widen sqrt(dt)]``."""
    h = widen * math.sqrt(dt)
    return 1.0 - h, 1.0 + h


def solve_eta(
    poly: QuarticPoly,
    dt,
    tol=1e-12,
    *,
    field_scale=0.0,
    widen=1.0,
    max_iter=100,
) -> EtaSolveReport:
    """Find the root of ``poly`` in ``[1 - sqrt(dt), 1 + sqrt(dt)]``.

    Newton's method from ``eta = 1``, clamped to the bracket. When ``g``
    changes sign across the bracket a bisection interval is maintained and
    used whenever a Newton step leaves it or the derivative vanishes.
    Converged when ``|g(eta)| <= tol * scale`` with ``scale = sum |c_i|``.

    A polynomial whose coefficients are all below ``1e-14 * field_scale``
    is reported as degenerate with ``eta = 1``. Raises
    :class:`SolvabilityFailure` when no root can be certified.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = eta_bracket(dt, widen)
    cmax = max(abs(c) for c in poly.coeffs)
    if not all(math.isfinite(c) for c in poly.coeffs):
        raise SolvabilityFailure(f"non-finite multiplier coefficients {poly.coeffs}")
    if cmax <= 1e-14 * field_scale:
        return EtaSolveReport(1.0, abs(poly.c0), 0, lo, hi, "newton", degenerate=True)

    scale = poly.scale
    target = tol * scale
    g_lo, g_hi = eval_g(poly, lo), eval_g(poly, hi)
    # compare signs rather than the product, which can underflow to zero
    bracketed = g_lo == 0.0 or g_hi == 0.0 or (g_lo < 0) != (g_hi < 0)
    a, b, g_a = lo, hi, g_lo

    eta = 1.0
    method = "newton"
    gv = eval_g(poly, eta)
    it = 0
    while abs(gv) > target:
        if it >= max_iter:
            break
        it += 1
        if bracketed:
            if (gv > 0) == (g_a > 0):
                a, g_a = eta, gv
            else:
                b = eta
        gp = eval_g_prime(poly, eta)
        step_ok = abs(gp) > 1e-14 * scale
        cand = eta - gv / gp if step_ok else None
        if bracketed:
            if cand is None or not (min(a, b) < cand < max(a, b)):
                cand = 0.5 * (a + b)
                method = "bisection-fallback"
        elif cand is None:
            break
        else:
            cand = min(max(cand, lo), hi)
            if cand == eta:
                break
        eta = cand
        gv = eval_g(poly, eta)

    report = EtaSolveReport(eta, abs(gv), it, lo, hi, method, converged=abs(gv) <= target)
    if not report.converged:
        why = "no sign change over the bracket" if not bracketed else "iteration limit reached"
        raise SolvabilityFailure(
            f"multiplier equation unsolved in [{lo:.6g}, {hi:.6g}]: {why}, "
            f"|g(eta)| = {abs(gv):.3e} > {target:.3e}",
            report,
        )
    return report


def gate_metric(grid: Grid, phi_tilde, phi_n, dt) -> float:
    """``|(F(phi_tilde) - F(phi_n), 1)| / dt``, the bulk-energy rate of the eta = 1 candidate."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return abs(bulk_energy_change(grid, phi_tilde, phi_n)) / dt


def sn_proxy(grid: Grid, phi_n, phi_nm1, dt) -> float:
    """Signed backward difference of the bulk energy, ``(F(phi_n) - F(phi_nm1), 1) / dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return bulk_energy_change(grid, phi_n, phi_nm1) / dt
