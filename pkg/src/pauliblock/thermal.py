"""Finite-temperature fidelity by canonical averaging.

At temperature ``tau`` (units hbar*omega_i/k_B) the N fermions initially
occupy levels ``m(1) < ... < m(N)`` with probability

    p_m = exp(-excitation(m)/tau) / Z ,
    excitation(m) = sum_j (E_m(j) - E_j) ,

and the process fidelity is the weighted average of the per-configuration
fidelities, each computed from the evolved versions of the occupied
levels.  The infinite configuration sum is truncated at an excitation
cutoff grown until the estimated omitted weight is below ``tail_bound``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NeedsMoreLevelsError

DEFAULT_TAIL_BOUND = 1e-6


@dataclass(frozen=True)
class OccupationConfig:
    """One occupation pattern: 1-based level indices, strictly increasing."""

    levels: tuple
    excitation_energy: float

    def row_indices(self):
        """0-based indices into an array of evolved states."""
        return tuple(l - 1 for l in self.levels)


@dataclass
class ThermalEnsemble:
    """Truncated canonical ensemble over occupation configurations."""

    tau: float
    configs: list
    weights: np.ndarray
    partition_sum: float
    e_cut: float
    m_max: int

    @property
    def size(self):
        return len(self.configs)

    def row_index_array(self):
        return np.array([c.row_indices() for c in self.configs], dtype=np.intp)


def _enumerate_below(energies, n_particles, e_cut):
    """All increasing n-tuples of levels with excitation <= e_cut.

    Depth-first with exact pruning: placing level v at slot j costs
    E_v - E_j, and the cheapest completion of the remaining slots uses
    consecutive levels, so branches are cut as soon as that lower bound
    crosses the cutoff.
    """
    m_available = len(energies)
    configs = []
    chosen = []

    def descend(slot, start, excitation):
        if slot == n_particles:
            configs.append((tuple(chosen), excitation))
            return
        remaining = n_particles - slot - 1
        for level in range(start, m_available - remaining):
            delta = energies[level] - energies[slot]
            floor = excitation + delta
            for r in range(remaining):
                floor += energies[level + 1 + r] - energies[slot + 1 + r]
            if floor > e_cut:
                break  # energies ascend, so later levels only cost more
            chosen.append(level + 1)
            descend(slot + 1, level + 1, excitation + delta)
            chosen.pop()

    descend(0, 0, 0.0)
    return configs


def _levels_required(energies, n_particles, e_cut):
    """Smallest level count proving no level beyond it can appear."""
    e_fermi = energies[n_particles - 1]
    above = np.nonzero(energies - e_fermi > e_cut)[0]
    if len(above) == 0:
        # Extrapolate with the last observed gap to give a useful estimate.
        last_gap = max(energies[-1] - energies[-2], 1e-12)
        missing = (e_cut - (energies[-1] - e_fermi)) / last_gap
        return len(energies) + int(math.ceil(missing)) + 1
    return int(above[0]) + 1


def enumerate_ensemble(
    energies, n_particles, tau, tail_bound=DEFAULT_TAIL_BOUND, complete_ladder=False
):
    """Truncated canonical ensemble of ``n_particles`` fermions.

    Parameters
    ----------
    energies : ascending array of single-particle energies (1-based levels)
    n_particles : int
    tau : float
        Temperature in hbar*omega_i/k_B; ``tau = 0`` gives the single
        ground configuration.
    tail_bound : float
        Target bound on the omitted Boltzmann weight.  The excitation
        cutoff grows shell by shell until the newest shell carries less
        than half this fraction of the total weight.
    complete_ladder : bool
        Treat ``energies`` as the entire spectrum (a hard cap) instead of
        the low end of an infinite one; no truncation certificate is
        demanded then.

    Raises
    ------
    NeedsMoreLevelsError
        If ``energies`` is too short to certify the truncation; the error
        reports the required level count.
    """
    energies = np.asarray(energies, dtype=float)
    if tau < 0:
        raise ConfigError(f"temperature must be >= 0, got {tau}")
    if n_particles < 1:
        raise ConfigError("need at least one particle")
    if len(energies) < n_particles:
        raise NeedsMoreLevelsError(n_particles, len(energies))
    if (np.diff(energies) < 0).any():
        raise ConfigError("energies must be ascending")

    ground = OccupationConfig(tuple(range(1, n_particles + 1)), 0.0)
    if tau == 0.0:
        return ThermalEnsemble(
            0.0, [ground], np.array([1.0]), 1.0, 0.0, n_particles
        )

    e_cut = tau * math.log(1.0 / tail_bound)
    shell = max(tau * math.log(100.0), 1e-3)
    configs = None
    while True:
        e_next = e_cut + shell
        if not complete_ladder:
            required = _levels_required(energies, n_particles, e_next)
            if required > len(energies):
                raise NeedsMoreLevelsError(required, len(energies))
        if configs is None:
            configs = _enumerate_below(energies, n_particles, e_cut)
        z_here = math.fsum(math.exp(-e / tau) for _, e in configs)
        probe = _enumerate_below(energies, n_particles, e_next)
        z_probe = math.fsum(math.exp(-e / tau) for _, e in probe)
        if z_probe - z_here <= 0.5 * tail_bound * z_probe:
            configs, e_cut = probe, e_next
            break
        configs, e_cut = probe, e_next

    weights = np.array([math.exp(-e / tau) for _, e in configs])
    z = float(math.fsum(weights))
    weights /= z
    m_max = max(c[-1] for c, _ in configs)
    return ThermalEnsemble(
        tau,
        [OccupationConfig(levels, exc) for levels, exc in configs],
        weights,
        z,
        e_cut,
        m_max,
    )


def ensemble_average(ensemble, per_config_values):
    """Compensated weighted sum of per-configuration fidelities."""
    terms = ensemble.weights * np.asarray(per_config_values)
    return float(math.fsum(terms))


def thermal_fidelity(
    schedule,
    n_protected,
    n_buffer,
    tau,
    settings=None,
    tail_bound=DEFAULT_TAIL_BOUND,
    n_points=None,
    check_dt=False,
):
    """Canonically averaged fidelity for one schedule and temperature.

    Shares its propagation and eigensolves with the zero-temperature
    pipeline; at ``tau = 0`` it reduces exactly to
    :func:`pauliblock.fidelity.scenario_fidelity`.
    """
    from .pipeline import Engine

    engine = Engine(n_points=n_points, settings=settings)
    return engine.thermal_fidelity(
        schedule,
        n_protected,
        n_buffer,
        tau,
        tail_bound=tail_bound,
        check_dt=check_dt,
    )
