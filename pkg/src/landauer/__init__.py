"""Finite-dimensional Landauer processes: equality form, finite-size bounds and constructions."""
from . import bounds, processes, quantum, thermo
from .bounds import BoundParams, NChoice, compute_M, compute_N, finite_size_bound
from .processes import ProcessSpec, run_process
from .quantum import QState, Unitary
from .thermo import Reservoir, thermal_state

__version__ = "0.1.0"

__all__ = [
    "bounds", "processes", "quantum", "thermo",
    "BoundParams", "NChoice", "compute_M", "compute_N", "finite_size_bound",
    "ProcessSpec", "run_process", "QState", "Unitary", "Reservoir", "thermal_state",
]
