"""Bound-state eigenproblems of static traps.

Two independent backends:

* :func:`solve` - Fourier-grid Hamiltonian: the kinetic operator is exact
  on the momentum lattice (a real symmetric circulant in position space),
  the potential is diagonal.  Shares its discretization with the
  propagator, so eigenstates are exactly band-limited states of the same
  lattice.
* :func:`solve_tridiagonal` - 3-point finite differences with Dirichlet
  boundaries; second-order accurate, used as a cross-check.

Both order energies ascending and fix the sign so the entry of largest
magnitude (lowest index on ties) is positive.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import ConfigError, ContainmentError, ConvergenceError, ResolutionError
from .grid import EDGE_AMPLITUDE_TOL, Grid, Wavefunction

# Fraction of the |k| lattice treated as the edge band, and the relative
# spectral amplitude allowed there.  Calibrated so that admitted states have
# eigenvalue discretization errors around 1e-7 or below.
KSPACE_EDGE_BAND = 0.02
KSPACE_EDGE_TOL = 1e-4

RESIDUAL_TOL = 1e-6

# Potential values are capped here before diagonalization.  Dense symmetric
# eigensolvers have backward error ~ eps * ||H||, so an uncapped confining
# potential (1e10 at the edge of a wide domain) would drown the residual
# bound; regions this far above the requested energies are classically
# forbidden by hundreds of decades, so the cap leaves the states unchanged.
POTENTIAL_CLIP = 1e6
CLIP_SAFETY = 1e-2


@dataclass
class EigenBasis:
    """Ordered lowest-K eigenpairs of a static trap Hamiltonian.

    ``states`` holds one unit-norm eigenstate per row (real amplitudes).
    """

    grid: Grid
    energies: np.ndarray
    states: np.ndarray

    @property
    def size(self):
        return len(self.energies)

    def state(self, i):
        """i-th eigenstate (0-based) as a :class:`Wavefunction`."""
        return Wavefunction(self.grid, self.states[i])


def effective_potential(potential):
    """Potential with the far-forbidden region capped (see POTENTIAL_CLIP)."""
    return np.minimum(potential, POTENTIAL_CLIP)


def kinetic_apply(amplitudes, grid):
    """Apply -0.5 d^2/dx^2 via the momentum lattice (rows = states)."""
    ft = scipy.fft.fft(amplitudes, axis=-1)
    ft *= 0.5 * grid.k_values**2
    return scipy.fft.ifft(ft, axis=-1)


def hamiltonian_apply(potential, grid, amplitudes):
    """Apply H = -0.5 d^2/dx^2 + V on one or many states (rows)."""
    return kinetic_apply(amplitudes, grid) + potential * amplitudes


def _fix_phases(states):
    idx = np.argmax(np.abs(states), axis=1)
    signs = np.sign(states[np.arange(states.shape[0]), idx])
    signs[signs == 0] = 1.0
    return states * signs[:, None]


def _parity_of(state):
    reflected = np.empty_like(state)
    reflected[0] = state[0]
    reflected[1:] = state[:0:-1]
    return float(np.dot(state, reflected) / np.dot(state, state))


def edge_band_ratio(states, grid):
    """Max spectral amplitude in the outer |k| band relative to the peak."""
    ft = np.abs(scipy.fft.fft(states, axis=-1))
    band = np.abs(grid.k_values) >= (1.0 - KSPACE_EDGE_BAND) * grid.k_max
    if not band.any():
        band = np.abs(grid.k_values) == np.abs(grid.k_values).max()
    return np.max(ft[:, band], axis=1) / np.max(ft, axis=1)


def check_resolution(states, grid, tol=KSPACE_EDGE_TOL):
    ratios = edge_band_ratio(states, grid)
    worst = int(np.argmax(ratios))
    if ratios[worst] >= tol:
        raise ResolutionError(
            f"state {worst + 1} has relative momentum-edge amplitude "
            f"{ratios[worst]:.2e} (>= {tol:.0e}); the grid undersamples it"
        )


def check_containment(states, grid, tol=EDGE_AMPLITUDE_TOL):
    a = np.abs(states)
    edge = np.maximum(a[:, 0], a[:, -1])
    ratios = edge / a.max(axis=1)
    worst = int(np.argmax(ratios))
    if ratios[worst] >= tol:
        raise ContainmentError(
            f"state {worst + 1} has relative boundary amplitude "
            f"{ratios[worst]:.2e} (>= {tol:.0e}); the domain is too small"
        )


def solve(potential, grid, n_states, check_grid=True):
    """Lowest eigenpairs of H = -0.5 d^2/dx^2 + V by dense diagonalization.

    Parameters
    ----------
    potential : array of shape (n_points,)
        Potential values on the grid.
    grid : Grid
    n_states : int
        Number of eigenpairs, must stay below ``n_points/4``.
    check_grid : bool
        When true (default), verify that every returned state is contained
        in the box and resolved by the momentum lattice; violations raise
        :class:`ContainmentError` / :class:`ResolutionError` so callers can
        enlarge or refine the grid.

    Returns
    -------
    EigenBasis
    """
    n = grid.n_points
    if not 1 <= n_states < n // 4:
        raise ConfigError(
            f"n_states={n_states} outside the safe range [1, {n // 4}) "
            f"for a grid of {n} points"
        )
    potential = np.asarray(potential, dtype=float)
    if potential.shape != (n,):
        raise ConfigError("potential length does not match the grid")
    potential = effective_potential(potential)

    # Kinetic operator: real symmetric circulant with first column from the
    # inverse transform of k^2/2.
    first_col = scipy.fft.ifft(0.5 * grid.k_values**2).real
    h = scipy.linalg.circulant(first_col)
    h[np.diag_indices_from(h)] += potential

    energies, vecs = scipy.linalg.eigh(
        h, subset_by_index=[0, n_states - 1], overwrite_a=True, check_finite=False
    )
    del h
    if energies[-1] > CLIP_SAFETY * POTENTIAL_CLIP:
        raise ConvergenceError(
            f"requested states reach E={energies[-1]:.3e}, too close to the "
            f"potential cap {POTENTIAL_CLIP:.0e}"
        )
    states = _fix_phases(vecs.T / np.sqrt(grid.dx))
    _order_degenerate_pairs(energies, states)

    residual_check(potential, grid, energies, states)
    if check_grid:
        check_containment(states, grid)
        check_resolution(states, grid)
    return EigenBasis(grid, energies, states)


def _order_degenerate_pairs(energies, states):
    # Ties at machine precision: even-parity state first, for reproducibility.
    for i in range(len(energies) - 1):
        if energies[i + 1] == energies[i]:
            if _parity_of(states[i]) < _parity_of(states[i + 1]):
                states[[i, i + 1]] = states[[i + 1, i]]


def residual_check(potential, grid, energies, states, tol=RESIDUAL_TOL):
    """Verify ||H phi - E phi|| < tol * max(|E|, 1) for every state."""
    resid = hamiltonian_apply(potential, grid, states) - energies[:, None] * states
    norms = np.sqrt(np.sum(np.abs(resid) ** 2, axis=1) * grid.dx)
    bounds = tol * np.maximum(np.abs(energies), 1.0)
    worst = int(np.argmax(norms / bounds))
    if norms[worst] >= bounds[worst]:
        raise ConvergenceError(
            f"eigenstate {worst + 1} residual {norms[worst]:.2e} exceeds "
            f"{bounds[worst]:.2e}"
        )


def solve_tridiagonal(potential, grid, n_states):
    """Finite-difference cross-check backend (Dirichlet boundaries)."""
    n = grid.n_points
    if not 1 <= n_states < n // 4:
        raise ConfigError(f"n_states={n_states} outside the safe range")
    potential = effective_potential(np.asarray(potential, dtype=float))
    inv_dx2 = 1.0 / grid.dx**2
    diag = inv_dx2 + potential
    off = np.full(n - 1, -0.5 * inv_dx2)
    energies, vecs = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, n_states - 1)
    )
    states = _fix_phases(vecs.T / np.sqrt(grid.dx))

    # Residual against the tridiagonal operator itself.
    resid = diag * states - energies[:, None] * states
    resid[:, :-1] += off[0] * states[:, 1:]
    resid[:, 1:] += off[0] * states[:, :-1]
    norms = np.sqrt(np.sum(resid**2, axis=1) * grid.dx)
    bounds = RESIDUAL_TOL * np.maximum(np.abs(energies), 1.0)
    if (norms >= bounds).any():
        worst = int(np.argmax(norms / bounds))
        raise ConvergenceError(
            f"finite-difference eigenstate {worst + 1} residual "
            f"{norms[worst]:.2e} exceeds {bounds[worst]:.2e}"
        )
    return EigenBasis(grid, energies, states)


# Grid used for Fermi-gap profiles; generous momentum headroom for the
# level counts of interest (dx ~ 0.04 resolves states far beyond N=40).
GAP_GRID = Grid(-20.0, 20.0, 1024)


def fermi_gap_profile(lam, n_max, omega_i=1.0, grid=None):
    """Gap E_(N+1) - E_N at the Fermi edge of V = 0.5*omega_i^2*(x^2+lam*x^4).

    Returns a list of (N, gap) pairs for N = 1..n_max.
    """
    if lam < 0:
        raise ConfigError("anharmonicity must be >= 0")
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    grid = grid or GAP_GRID
    potential = 0.5 * omega_i**2 * (grid.x**2 + lam * grid.x**4)
    basis = solve(potential, grid, n_max + 1)
    gaps = np.diff(basis.energies)
    return [(n, float(gaps[n - 1])) for n in range(1, n_max + 1)]
