"""Buffer-protected quantum control of trapped ideal fermions in 1D.

Simulates time-dependent single-particle dynamics in expanding, moving
and splitting traps, and evaluates how well a layer of buffer fermions
shields the lowest-lying particles from excitations, at zero and finite
temperature.  Units: hbar = m = 1; times in 1/omega, energies in
hbar*omega, temperatures in hbar*omega/k_B.
"""

from .errors import (
    ConfigError,
    ContainmentError,
    ConvergenceError,
    GridError,
    GridMismatchError,
    InstabilityError,
    NeedsMoreLevelsError,
    NumericalConsistencyError,
    ResolutionError,
    SimulationError,
    TooLargeError,
)
from .experiments import (
    Axis,
    SweepSpec,
    min_buffer_search,
    run_sweep,
    temperature_compensation_report,
)
from .fidelity import (
    FidelityResult,
    Method,
    OverlapMatrix,
    fidelity_fast,
    fidelity_oracle,
    random_subunitary,
    scenario_fidelity,
)
from .grid import Grid, Wavefunction, inner_product, to_momentum, to_position
from .pipeline import Engine
from .potentials import PotentialSchedule, RampShape, Task
from .propagate import PropagationSettings, propagate, propagate_basis
from .spectral import EigenBasis, fermi_gap_profile, solve, solve_tridiagonal
from .thermal import OccupationConfig, ThermalEnsemble, enumerate_ensemble, thermal_fidelity

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "ConfigError",
    "ContainmentError",
    "ConvergenceError",
    "EigenBasis",
    "Engine",
    "FidelityResult",
    "Grid",
    "GridError",
    "GridMismatchError",
    "InstabilityError",
    "Method",
    "NeedsMoreLevelsError",
    "NumericalConsistencyError",
    "OccupationConfig",
    "OverlapMatrix",
    "PotentialSchedule",
    "PropagationSettings",
    "RampShape",
    "ResolutionError",
    "SimulationError",
    "SweepSpec",
    "Task",
    "ThermalEnsemble",
    "TooLargeError",
    "Wavefunction",
    "enumerate_ensemble",
    "fermi_gap_profile",
    "fidelity_fast",
    "fidelity_oracle",
    "inner_product",
    "min_buffer_search",
    "propagate",
    "propagate_basis",
    "random_subunitary",
    "run_sweep",
    "scenario_fidelity",
    "solve",
    "solve_tridiagonal",
    "temperature_compensation_report",
    "thermal_fidelity",
    "to_momentum",
    "to_position",
]
