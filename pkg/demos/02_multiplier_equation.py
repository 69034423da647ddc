"""One step of the Lagrange multiplier scheme, taken apart.

The update is split as ``phi_next = p + eta * dt * q`` and the multiplier
``eta`` solves a quartic ``g(eta) = 0`` which enforces the discrete energy
constraint. This script assembles ``g`` for a smooth state, compares it with
direct quadrature, and solves for ``eta``.
"""

# %%
import numpy as np

from lmflow import cahn_hilliard, compute_p, compute_q, make_grid, solve_eta
from lmflow.multiplier import assemble_g, eta_bracket, eval_g, g_direct

grid = make_grid(64, 64)
flow = cahn_hilliard(0.06)
dt = 1e-4
X, Y = grid.coords()

# two consecutive levels of a slowly varying field
phi_nm1 = 0.3 + 0.05 * (np.cos(X) + np.cos(2 * Y))
phi_n = 0.3 + 0.0499 * (np.cos(X) + np.cos(2 * Y))
phi_star = 1.5 * phi_n - 0.5 * phi_nm1

# %% The two resolvent solves
p = compute_p(grid, phi_n, phi_nm1, flow, dt)
q = compute_q(grid, phi_star, flow, dt)
print("mean of q (zero for Cahn-Hilliard):", q.mean())

# %% The quartic and its quadrature oracle
poly = assemble_g(grid, p, q, phi_n, phi_star, dt)
print("coefficients c0..c4:", ", ".join(f"{c:.3e}" for c in poly.coeffs))
for eta in (0.9, 1.0, 1.1):
    print(f"g({eta}) = {eval_g(poly, eta):+.6e}   quadrature {g_direct(grid, p, q, phi_n, phi_star, dt, eta):+.6e}")

# %% Newton inside the admissible bracket
rep = solve_eta(poly, dt)
lo, hi = eta_bracket(dt)
print(f"eta = {rep.eta:.15f} in [{lo:.4f}, {hi:.4f}] after {rep.iterations} iterations ({rep.method})")
# the two levels above are not consecutive states of a real trajectory, so eta - 1
# is not yet at its O(dt^2) size here; demos/04_convergence.py measures that
print("eta - 1 =", rep.eta - 1)
