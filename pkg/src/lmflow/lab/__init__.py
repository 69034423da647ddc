"""Experiment layer: initial data, files, convergence studies and the CLI."""

from .convergence import ConvergenceReport, convergence_study
from .initial import initial_field, modes_init, parse_modes, random_init
from .io import (
    DirectorySink,
    SeriesWriter,
    read_series,
    read_snapshot,
    write_series,
    write_snapshot,
)

__all__ = [
    "ConvergenceReport",
    "convergence_study",
    "initial_field",
    "modes_init",
    "parse_modes",
    "random_init",
    "DirectorySink",
    "SeriesWriter",
    "read_series",
    "read_snapshot",
    "write_series",
    "write_snapshot",
]
