"""Lagrange multiplier time stepping for Cahn-Hilliard and Allen-Cahn gradient flows.

Pseudo-spectral discretization on periodic 2-D grids; see :mod:`lmflow.schemes`
for the steppers and :mod:`lmflow.lab` for experiment tooling.
"""

from .multiplier import (
    DegenerateEquation,
    EtaSolveReport,
    MultiplierError,
    QuarticPoly,
    SolvabilityFailure,
    assemble_g,
    compute_p,
    compute_q,
    eval_g,
    eval_g_prime,
    gate_metric,
    sn_proxy,
    solve_eta,
)
from .potential import (
    FlowSpec,
    allen_cahn,
    bulk_energy,
    cahn_hilliard,
    chemical_potential,
    modified_energy,
    potential_F,
    potential_Fprime,
    total_energy,
)
from .schemes import (
    MemorySink,
    NonFiniteField,
    RunConfig,
    SchemeState,
    StepOutcome,
    TimeSeriesRecord,
    bootstrap,
    run,
    step,
    step_modified_lm,
    step_original_lm,
    step_sav_cn,
)
from .spectral import (
    FourierSymbol,
    Grid,
    SpectralField,
    apply_symbol,
    fft_forward,
    fft_inverse,
    hk_seminorm,
    inner_product,
    l2_norm,
    make_grid,
    mean,
    solve_resolvent,
)

__version__ = "0.1.0"
