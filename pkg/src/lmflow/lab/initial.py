"""Seeded and analytic initial conditions."""

from __future__ import annotations

import numpy as np

from ..spectral import Grid

_TWO_M53 = 2.0**-53


def uniform_pm1(n, seed):
    """``n`` i.i.d. uniform values on ``[-1, 1)`` from PCG64.

    Built on the raw 64-bit PCG64 output stream (O'Neill's PCG-XSL-RR 128/64
    as implemented by NumPy) with the conversion ``u = (x >> 11) * 2**-53``
    done here, so the values depend only on the generator algorithm and the
    seed, not on NumPy's distribution code.
    """
    raw = np.random.PCG64(seed).random_raw(n)
    u = (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53
    return 2.0 * u - 1.0


def random_init(grid: Grid, mean=0.3, amp=0.01, seed=0) -> np.ndarray:
    """``mean + amp * U`` with ``U`` uniform on ``[-1, 1)``, filled row by row."""
    if amp < 0:
        raise ValueError(f"amplitude must be nonnegative, got {amp!r}")
    u = uniform_pm1(grid.npoints, seed).reshape(grid.shape)
    return mean + amp * u


def modes_init(grid: Grid, modes, mean=0.0, amp=1e-3) -> np.ndarray:
    """``mean + amp * sum cos(2 pi (mx x / lx + my y / ly))`` over integer ``(mx, my)`` pairs."""
    X, Y = grid.coords()
    phi = np.full(grid.shape, float(mean))
    for mx, my in modes:
        phi += amp * np.cos(2 * np.pi * (mx * X / grid.lx + my * Y / grid.ly))
    return phi


def parse_modes(text):
    """Parse ``"1:0,0:2"`` into ``[(1, 0), (0, 2)]``."""
    modes = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 2:
            raise ValueError(f"mode {item!r} is not of the form mx:my")
        modes.append((int(parts[0]), int(parts[1])))
    if not modes:
        raise ValueError("empty mode list")
    return modes


def initial_field(cfg) -> np.ndarray:
    """Initial field described by ``cfg.init``.

    ``random`` uses :func:`random_init` with ``cfg.seed``; ``modes:<list>``
    uses :func:`modes_init`; ``file:<path>`` loads a snapshot.
    """
    grid = cfg.grid
    kind = cfg.init
    if kind == "random":
        return random_init(grid, cfg.mean, cfg.amp, cfg.seed)
    if kind.startswith("modes:"):
        return modes_init(grid, parse_modes(kind[len("modes:"):]), cfg.mean, cfg.amp)
    if kind.startswith("file:"):
        from .io import read_snapshot

        phi = read_snapshot(kind[len("file:"):])
        if phi.shape != grid.shape:
            raise ValueError(f"snapshot shape {phi.shape} does not match grid {grid.shape}")
        return phi
    raise ValueError(f"unknown initial condition {kind!r}")
