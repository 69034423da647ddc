"""Spectral building blocks: grids, transforms, symbols and the resolvent.

Run with ``python3 demos/01_spectral_basics.py``.
"""

# %% A periodic grid and its wavenumbers
import numpy as np

from lmflow.spectral import (
    FourierSymbol,
    apply_symbol,
    fft_forward,
    fft_inverse,
    hk_seminorm,
    inner_product,
    l2_norm,
    make_grid,
    solve_resolvent,
)

grid = make_grid(32, 32)
print("grid", grid.shape, "cell area", grid.cell_area, "domain area", grid.area)
print("largest |k|^2 on the grid:", grid.ksq.max())

# %% Transforms round-trip to rounding error
X, Y = grid.coords()
f = np.cos(X) + 0.5 * np.sin(3 * Y)
back = fft_inverse(fft_forward(grid, f))
print("round-trip error:", np.abs(back - f).max())

# %% The Laplacian symbol acts diagonally: cos(x) is an eigenfunction with eigenvalue -1
lap = FourierSymbol.laplacian(grid)
print("||Lap cos x + cos x|| =", l2_norm(grid, apply_symbol(np.cos(X), lap) + np.cos(X)))
print("||cos x||^2 =", inner_product(grid, np.cos(X), np.cos(X)), "(expected 2 pi^2 =", 2 * np.pi**2, ")")
print("H^2 seminorm of cos(2y):", hk_seminorm(grid, np.cos(2 * Y), 1), "vs 4 ||cos 2y|| =", 4 * l2_norm(grid, np.cos(2 * Y)))

# %% Resolvent solves (I + c Lap^2) u = f mode by mode
for c in (0.0, 0.1, 10.0):
    u = solve_resolvent(f, c, grid=grid)
    residual = u + c * apply_symbol(u, FourierSymbol.bilaplacian(grid)) - f
    print(f"c={c:<5} residual {l2_norm(grid, residual):.2e}  ||u||={l2_norm(grid, u):.4f}")
