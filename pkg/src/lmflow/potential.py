"""Double-well potential, chemical potential and the discrete energies.

The free energy is split as ``E = 1/2 (L phi, phi) + (F(phi), 1)`` with the
quartic ``F(phi) = (phi**2 - 1)**2 / 4``. For Cahn-Hilliard ``L = -eps2 Lap``
and ``G = -Lap``; Allen-Cahn keeps the same ``L`` with ``G = I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, check_field, spectral_inner_product

FLOWS = ("cahn-hilliard", "allen-cahn")


@dataclass(frozen=True)
class FlowSpec:
    name: str = "cahn-hilliard"
    eps2: float = 0.06
    dealias: bool = False

    def __post_init__(self):
        if self.name not in FLOWS:
            raise ValueError(f"unknown flow {self.name!r}; expected one of {FLOWS}")
        if not self.eps2 > 0:
            raise ValueError(f"eps2 must be positive, got {self.eps2!r}")

    @property
    def conserves_mass(self):
        return self.name == "cahn-hilliard"

    def sigma_L(self, grid: Grid) -> np.ndarray:
        return self.eps2 * grid.ksq

    def sigma_G(self, grid: Grid) -> np.ndarray:
        if self.name == "cahn-hilliard":
            return grid.ksq
        return np.ones(grid.spectral_shape)

    def sigma_GL(self, grid: Grid) -> np.ndarray:
        return self.sigma_G(grid) * self.sigma_L(grid)


def cahn_hilliard(eps2=0.06, dealias=False):
    return FlowSpec("cahn-hilliard", eps2, dealias)


def allen_cahn(eps2=0.06, dealias=False):
    return FlowSpec("allen-cahn", eps2, dealias)


def potential_F(phi):
    phi = np.asarray(phi, dtype=np.float64)
    return 0.25 * (phi * phi - 1.0) ** 2


def potential_Fprime(phi):
    phi = np.asarray(phi, dtype=np.float64)
    return phi * phi * phi - phi


def bulk_energy(grid: Grid, phi) -> float:
    """``(F(phi), 1)``."""
    return float(np.sum(potential_F(check_field(grid, phi)))) * grid.cell_area


def bulk_energy_change(grid: Grid, a, b) -> float:
    """``(F(a) - F(b), 1)`` without subtracting two large integrals.

    Uses ``F(a) - F(b) = (a - b)(a + b)(a**2 + b**2 - 2) / 4`` pointwise.
    """
    a = check_field(grid, a)
    b = check_field(grid, b)
    d = 0.25 * (a - b) * (a + b) * (a * a + b * b - 2.0)
    return float(np.sum(d)) * grid.cell_area


def chemical_potential(grid: Grid, phi, flow: FlowSpec) -> np.ndarray:
    phi = check_field(grid, phi)
    lphi = np.fft.irfft2(np.fft.rfft2(phi) * flow.sigma_L(grid), s=grid.shape)
    return potential_Fprime(phi) + lphi


def _quadratic(grid, phi, flow):
    return 0.5 * spectral_inner_product(grid, np.fft.rfft2(phi), symbol=flow.sigma_L(grid))


def total_energy(grid: Grid, phi, flow: FlowSpec) -> float:
    phi = check_field(grid, phi)
    return _quadratic(grid, phi, flow) + bulk_energy(grid, phi)


def modified_energy(grid: Grid, fnew, fold, flow: FlowSpec) -> float:
    """Energy of ``fnew`` plus the jump term ``1/8 (L(fnew - fold), fnew - fold)``."""
    fnew = check_field(grid, fnew)
    fold = check_field(grid, fold)
    jump = spectral_inner_product(grid, np.fft.rfft2(fnew - fold), symbol=flow.sigma_L(grid))
    return total_energy(grid, fnew, flow) + 0.125 * jump
