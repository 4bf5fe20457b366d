"""Scenario assembly: grids, eigensolves, propagation and overlaps.

The :class:`Engine` memoizes the expensive pieces within one run:

* endpoint eigenbases, keyed by potential and grid (a request for K
  states is served by slicing any cached solve with >= K states);
* propagated state families, keyed by schedule, grid and dt (a request
  for M states is served by slicing a cached run with >= M states);
* the validated time step and grid per schedule family (same task and
  endpoint parameters, any duration).

Grids start from the task defaults and escalate automatically: a
position-space leak doubles the domain, momentum-space undersampling
doubles the point count.  For the transport task the final trap is the
initial one translated; when the translation is a whole number of lattice
steps the target basis is obtained by rolling the initial states and
verifying the eigen-residual, instead of a second dense solve.
"""

import numpy as np

from . import spectral
from .errors import (
    ConfigError,
    ContainmentError,
    ConvergenceError,
    NeedsMoreLevelsError,
    ResolutionError,
)
from .fidelity import (
    FidelityResult,
    Method,
    OverlapMatrix,
    fidelity_fast,
    gram_fidelity_values,
    verify_against_oracle,
)
from .potentials import Task
from .propagate import PropagationSettings, propagate_basis
from .thermal import DEFAULT_TAIL_BOUND, ensemble_average, enumerate_ensemble

MAX_ESCALATIONS = 4


def _schedule_key(schedule):
    return (
        schedule.task.value,
        schedule.shape.value,
        schedule.T,
        schedule.lam,
        schedule.omega_i,
        schedule.omega_f,
        schedule.omega,
        schedule.x0_i,
        schedule.x0_f,
        schedule.h_i,
        schedule.h_f,
    )


def _family_key(schedule):
    # Everything but the ramp shape and duration: same traps, same grids.
    key = _schedule_key(schedule)
    return key[:1] + key[3:]


def _grid_key(grid):
    return (grid.x_min, grid.x_max, grid.n_points)


def _check_counts(n_protected, n_buffer):
    if n_protected < 0 or n_buffer < 0 or n_protected + n_buffer < 1:
        raise ConfigError(
            f"invalid particle counts N_p={n_protected}, N_b={n_buffer}; "
            "need N_p >= 0, N_b >= 0 and N_p + N_b >= 1"
        )


class Engine:
    """Caching scenario runner; cheap to create, reusable across sweeps."""

    def __init__(self, n_points=None, settings=None):
        self.n_points = n_points
        self.settings = settings or PropagationSettings()
        self._bases = {}  # (grid key, potential hash) -> EigenBasis
        self._grids = {}  # family key -> validated Grid
        self._props = {}  # (schedule key, grid key, dt) -> states array
        self._dts = {}  # family key -> validated dt

    # -- eigensolves -------------------------------------------------------

    def _solve(self, potential, grid, n_states):
        key = (_grid_key(grid), hash(potential.tobytes()))
        cached = self._bases.get(key)
        if cached is not None and cached.size >= n_states:
            return spectral.EigenBasis(
                grid, cached.energies[:n_states], cached.states[:n_states]
            )
        basis = spectral.solve(potential, grid, n_states)
        self._bases[key] = basis
        return basis

    def _rolled_targets(self, schedule, grid, initial, n_states):
        """Translate initial eigenstates to the final trap center, if exact."""
        shift = (schedule.x0_f - schedule.x0_i) / grid.dx
        if abs(shift - round(shift)) > 1e-9:
            return None
        rolled = np.roll(initial.states[:n_states], int(round(shift)), axis=1)
        energies = initial.energies[:n_states].copy()
        potential = spectral.effective_potential(schedule.evaluate(grid, schedule.T))
        try:
            spectral.residual_check(potential, grid, energies, rolled)
            spectral.check_containment(rolled, grid)
        except (ConvergenceError, ContainmentError):
            return None
        return spectral.EigenBasis(grid, energies, rolled)

    def endpoint_bases(self, schedule, n_initial, n_targets):
        """(grid, initial basis, target basis) with automatic escalation."""
        family = _family_key(schedule)
        grid = self._grids.get(family) or schedule.default_grid(self.n_points)
        for attempt in range(MAX_ESCALATIONS + 1):
            try:
                v0 = schedule.evaluate(grid, 0.0)
                initial = self._solve(v0, grid, max(n_initial, n_targets))
                if schedule.task is Task.TRANSPORT:
                    targets = self._rolled_targets(schedule, grid, initial, n_targets)
                    if targets is None:
                        v1 = schedule.evaluate(grid, schedule.T)
                        targets = self._solve(v1, grid, n_targets)
                else:
                    v1 = schedule.evaluate(grid, schedule.T)
                    targets = self._solve(v1, grid, n_targets)
                self._grids[family] = grid
                return grid, initial, targets
            except ContainmentError:
                if attempt == MAX_ESCALATIONS:
                    raise
                grid = grid.widened()
            except ResolutionError:
                if attempt == MAX_ESCALATIONS:
                    raise
                grid = grid.refined()
        raise AssertionError("unreachable")

    # -- propagation ---------------------------------------------------------

    def evolved_states(self, schedule, grid, basis, n_states, settings):
        key = (_schedule_key(schedule), _grid_key(grid), settings.dt)
        cached = self._props.get(key)
        if cached is not None and cached.shape[0] >= n_states:
            return cached[:n_states]
        states = propagate_basis(basis, n_states, schedule, settings)
        self._props[key] = states
        return states

    def validated_settings(self, schedule, n_states, check_dt):
        """Settings whose dt passed the halving check for this family."""
        settings = self.settings
        if not check_dt:
            return settings
        family = _family_key(schedule)
        dt = self._dts.get(family)
        if dt is None:
            dt = self._converge_dt(schedule, n_states, settings)
            self._dts[family] = dt
        if dt == settings.dt:
            return settings
        return PropagationSettings(
            dt, settings.store_trajectory, settings.tolerance, settings.n_samples
        )

    def _converge_dt(self, schedule, n_states, settings):
        grid, initial, targets = self.endpoint_bases(schedule, n_states, n_states)
        dt = settings.dt
        previous = None
        for _ in range(12):
            trial = PropagationSettings(dt, tolerance=settings.tolerance)
            states = self.evolved_states(schedule, grid, initial, n_states, trial)
            overlaps = np.conj(states) @ targets.states.T * grid.dx
            if previous is not None:
                if np.max(np.abs(overlaps - previous[1])) < settings.tolerance:
                    return previous[0]
            previous = (dt, overlaps)
            dt *= 0.5
        raise ConvergenceError(
            f"time step did not converge to tolerance {settings.tolerance} "
            f"after halving down to dt={dt * 2}"
        )

    # -- overlap assembly -----------------------------------------------------

    def master_overlaps(self, schedule, n_states, n_protected, settings):
        """Overlap matrix rows for the lowest ``n_states`` evolved levels."""
        grid, initial, targets = self.endpoint_bases(
            schedule, n_states, max(n_protected, 1)
        )
        evolved = self.evolved_states(schedule, grid, initial, n_states, settings)
        matrix = np.conj(evolved) @ targets.states[:n_protected].T * grid.dx
        return matrix, grid, initial

    # -- fidelities ------------------------------------------------------------

    def scenario_fidelity(
        self,
        schedule,
        n_protected,
        n_buffer,
        settings=None,
        verify_oracle=False,
        check_dt=False,
    ):
        _check_counts(n_protected, n_buffer)
        n_total = n_protected + n_buffer
        settings = settings or self.validated_settings(schedule, n_total, check_dt)
        matrix, _, _ = self.master_overlaps(schedule, n_total, n_protected, settings)
        a = OverlapMatrix(matrix)
        result = fidelity_fast(a)
        if verify_oracle:
            verify_against_oracle(a, result)
        return result

    def thermal_fidelity(
        self,
        schedule,
        n_protected,
        n_buffer,
        tau,
        settings=None,
        tail_bound=DEFAULT_TAIL_BOUND,
        check_dt=False,
    ):
        values, _ = self.thermal_fidelity_curve(
            schedule,
            n_protected,
            n_buffer,
            [tau],
            settings,
            tail_bound=tail_bound,
            check_dt=check_dt,
        )
        n_total = n_protected + n_buffer
        return FidelityResult(
            values[0], Method.GRAM_DETERMINANT, n_total, n_protected, n_buffer
        )

    def thermal_fidelity_curve(
        self,
        schedule,
        n_protected,
        n_buffer,
        taus,
        settings=None,
        tail_bound=DEFAULT_TAIL_BOUND,
        check_dt=False,
    ):
        """Thermal fidelity at several temperatures from one propagation.

        Returns (values, ensembles).  The master overlap matrix covers the
        highest level of the hottest ensemble; each temperature then only
        re-weights per-configuration fidelities.
        """
        _check_counts(n_protected, n_buffer)
        n_total = n_protected + n_buffer
        if len(taus) == 0:
            raise ConfigError("no temperatures supplied")
        if min(taus) < 0:
            raise ConfigError("temperatures must be >= 0")
        settings = settings or self.validated_settings(schedule, n_total, check_dt)

        tau_max = max(taus)
        if tau_max > 0:
            m_needed, energies = self._ensemble_levels(
                schedule, n_total, tau_max, tail_bound
            )
        else:
            m_needed = n_total
            energies = None
        matrix, grid, initial = self.master_overlaps(
            schedule, m_needed, n_protected, settings
        )
        if energies is None:
            energies = initial.energies

        values = []
        ensembles = []
        for tau in taus:
            ensemble = enumerate_ensemble(energies, n_total, tau, tail_bound)
            per_config = gram_fidelity_values(matrix, ensemble.row_index_array())
            values.append(ensemble_average(ensemble, per_config))
            ensembles.append(ensemble)
        return values, ensembles

    def _ensemble_levels(self, schedule, n_total, tau, tail_bound):
        """(level count to propagate, energy ladder for enumerations)."""
        n_levels = max(n_total + 8, 12)
        for _ in range(8):
            _, initial, _ = self.endpoint_bases(schedule, n_levels, 1)
            try:
                ensemble = enumerate_ensemble(
                    initial.energies[:n_levels], n_total, tau, tail_bound
                )
            except NeedsMoreLevelsError as exc:
                n_levels = max(exc.required, n_levels + 4)
                continue
            return ensemble.m_max, initial.energies[:n_levels]
        raise ConvergenceError(
            f"could not satisfy the thermal tail bound with {n_levels} levels"
        )
