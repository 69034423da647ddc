"""Periodic 2-D grid, Fourier transforms and diagonal operators.

Fields are plain ``float64`` arrays of shape ``(ny, nx)``: row ``j`` holds the
values at ``y_j`` and column ``i`` the values at ``x_i`` (row-major, one grid
row per ``y``).

Spectral data uses the real-to-complex layout of :func:`numpy.fft.rfft2`,
shape ``(ny, nx // 2 + 1)``, with the unnormalized forward convention: the
transform of a constant ``c`` has a single nonzero entry ``c * nx * ny`` at
mode ``(0, 0)``. The inverse divides by ``nx * ny``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "FourierSymbol",
    "make_grid",
    "check_field",
    "fft_forward",
    "fft_inverse",
    "apply_symbol",
    "invert_symbol",
    "solve_resolvent",
    "inner_product",
    "spectral_inner_product",
    "l2_norm",
    "mean",
    "hk_seminorm",
]


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on ``[0, lx) x [0, ly)``.

    Equality and hashing only look at the four defining numbers, so two grids
    built from the same arguments are interchangeable.
    """

    nx: int
    ny: int
    lx: float = 2 * np.pi
    ly: float = 2 * np.pi

    kx: np.ndarray = field(init=False, repr=False, compare=False)
    ky: np.ndarray = field(init=False, repr=False, compare=False)
    ksq: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = field(init=False, repr=False, compare=False)
    rfft_weight: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n!r}")
        if not (self.lx > 0 and self.ly > 0) or not np.isfinite([self.lx, self.ly]).all():
            raise ValueError(f"domain lengths must be positive, got {self.lx!r}, {self.ly!r}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "lx", float(self.lx))
        object.__setattr__(self, "ly", float(self.ly))

        kx = 2 * np.pi * np.fft.fftfreq(self.nx, d=self.lx / self.nx)
        ky = 2 * np.pi * np.fft.fftfreq(self.ny, d=self.ly / self.ny)
        object.__setattr__(self, "kx", _readonly(kx))
        object.__setattr__(self, "ky", _readonly(ky))

        # rfft layout: last axis is x, non-negative kx only
        kxr = 2 * np.pi * np.fft.rfftfreq(self.nx, d=self.lx / self.nx)
        KX, KY = np.meshgrid(kxr, ky)
        object.__setattr__(self, "ksq", _readonly(KX**2 + KY**2))

        mx = np.abs(np.fft.rfftfreq(self.nx, d=1.0 / self.nx))
        my = np.abs(np.fft.fftfreq(self.ny, d=1.0 / self.ny))
        MX, MY = np.meshgrid(mx, my)
        mask = (MX < self.nx / 3) & (MY < self.ny / 3)
        object.__setattr__(self, "dealias_mask", _readonly(mask))

        # multiplicity of each rfft column in the full spectrum
        w = np.full(self.nx // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        object.__setattr__(self, "rfft_weight", _readonly(np.broadcast_to(w, self.spectral_shape)))

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def spectral_shape(self):
        return (self.ny, self.nx // 2 + 1)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def area(self):
        return self.lx * self.ly

    @property
    def npoints(self):
        return self.nx * self.ny

    def coords(self):
        """Return ``(X, Y)`` meshgrids of node coordinates, each of shape ``(ny, nx)``."""
        x = np.arange(self.nx) * self.dx
        y = np.arange(self.ny) * self.dy
        return np.meshgrid(x, y)


@functools.lru_cache(maxsize=32)
def make_grid(nx, ny, lx=2 * np.pi, ly=2 * np.pi) -> Grid:
    """Build (or fetch the cached) periodic grid; raises ``ValueError`` on bad sizes."""
    return Grid(nx, ny, lx, ly)


def check_field(grid: Grid, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid shape {grid.shape}")
    return f


@dataclass(frozen=True)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match {self.grid.spectral_shape}"
            )


def fft_forward(grid: Grid, f) -> SpectralField:
    return SpectralField(grid, np.fft.rfft2(check_field(grid, f)))


def fft_inverse(F: SpectralField) -> np.ndarray:
    return np.fft.irfft2(F.coeffs, s=F.grid.shape)


@dataclass(frozen=True)
class FourierSymbol:
    """A real diagonal operator tabulated on the rfft modes of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v = np.broadcast_to(v, self.grid.spectral_shape)
        if not np.isfinite(v).all():
            raise ValueError("symbol values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @classmethod
    def from_function(cls, grid, fn):
        """Tabulate ``fn(kx, ky)`` on the rfft mode grid."""
        kxr = 2 * np.pi * np.fft.rfftfreq(grid.nx, d=grid.dx)
        KX, KY = np.meshgrid(kxr, grid.ky)
        return cls(grid, fn(KX, KY))

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.ones(grid.spectral_shape))

    @classmethod
    def laplacian(cls, grid):
        return cls(grid, -grid.ksq)

    @classmethod
    def bilaplacian(cls, grid):
        return cls(grid, grid.ksq**2)

    def _check(self, other):
        if other.grid != self.grid:
            raise ValueError("symbols live on different grids")

    def __mul__(self, other):
        if isinstance(other, FourierSymbol):
            self._check(other)
            return FourierSymbol(self.grid, self.values * other.values)
        return FourierSymbol(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, FourierSymbol):
            self._check(other)
            return FourierSymbol(self.grid, self.values + other.values)
        return FourierSymbol(self.grid, self.values + float(other))

    __radd__ = __add__


def _same_grid(grid, s):
    if s.grid != grid:
        raise ValueError("symbol grid does not match field grid")


def apply_symbol(f, s: FourierSymbol) -> np.ndarray:
    """Multiply ``f`` by ``s`` mode by mode."""
    grid = s.grid
    return np.fft.irfft2(np.fft.rfft2(check_field(grid, f)) * s.values, s=grid.shape)


def invert_symbol(f, s: FourierSymbol) -> np.ndarray:
    """Solve ``s u = f``; every mode of ``s`` must be bounded away from zero."""
    if np.min(np.abs(s.values)) < np.finfo(float).eps:
        raise ValueError("symbol is not invertible: some mode is below machine epsilon")
    grid = s.grid
    return np.fft.irfft2(np.fft.rfft2(check_field(grid, f)) / s.values, s=grid.shape)


def solve_resolvent(f, c, gl: FourierSymbol | None = None, grid: Grid | None = None) -> np.ndarray:
    """Apply ``(I + c * GL)^{-1}`` to ``f``.

    ``gl`` defaults to the bilaplacian of ``grid``; it must be positive
    semidefinite so that every mode of ``1 + c * GL`` is at least one.
    """
    if c < 0:
        raise ValueError(f"resolvent coefficient must be nonnegative, got {c!r}")
    if gl is None:
        if grid is None:
            raise TypeError("solve_resolvent needs either a symbol or a grid")
        gl = FourierSymbol.bilaplacian(grid)
    elif grid is not None:
        _same_grid(grid, gl)
    if np.min(gl.values) < 0:
        raise ValueError("resolvent symbol must be positive semidefinite")
    g = gl.grid
    return np.fft.irfft2(np.fft.rfft2(check_field(g, f)) / (1.0 + c * gl.values), s=g.shape)


def inner_product(grid: Grid, f, g) -> float:
    """Midpoint-rule ``(f, g)`` over the periodic cell."""
    f = check_field(grid, f)
    g = check_field(grid, g)
    return float(np.sum(f * g)) * grid.cell_area


def spectral_inner_product(grid: Grid, F, G=None, symbol=None) -> float:
    """``(f, S g)`` evaluated from rfft coefficients (Parseval).

    ``F`` and ``G`` are coefficient arrays in the rfft layout; ``symbol``
    is an optional real array weighting each mode.
    """
    if G is None:
        prod = F.real**2 + F.imag**2
    else:
        prod = (F * np.conj(G)).real
    if symbol is not None:
        prod = prod * symbol
    return float(np.sum(prod * grid.rfft_weight)) * grid.cell_area / grid.npoints


def l2_norm(grid: Grid, f) -> float:
    return float(np.sqrt(inner_product(grid, f, f)))


def mean(grid: Grid, f) -> float:
    return float(np.mean(check_field(grid, f)))


def hk_seminorm(grid: Grid, f, m: int) -> float:
    """``||Delta^m f||`` via the symbol ``(-|k|^2)^m``."""
    if m < 0:
        raise ValueError("order must be nonnegative")
    return l2_norm(grid, apply_symbol(f, FourierSymbol(grid, (-grid.ksq) ** m)))
