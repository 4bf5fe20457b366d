"""Uniform 1D spatial lattice, wavefunction container and Fourier transforms.

Natural units are used throughout the package: hbar = m = 1, so momenta
are wavenumbers and the harmonic length scale of a trap of frequency
``omega`` is ``d = 1/sqrt(omega)``.

The grid is periodic: position samples are ``x_min + j*dx`` for
``j = 0..n_points-1`` (the right endpoint is identified with the left),
and the companion momentum lattice is the FFT wavenumber set spanning
``[-pi/dx, pi/dx)`` with spacing ``2*pi/(n_points*dx)``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import ConfigError, GridMismatchError

# Relative amplitude allowed at the grid boundary before a state is
# considered to have leaked out of the box.
EDGE_AMPLITUDE_TOL = 1e-6


class Grid:
    """Uniform periodic lattice on ``[x_min, x_max)``.

    Parameters
    ----------
    x_min, x_max : float
        Domain edges, ``x_max > x_min``.
    n_points : int
        Number of lattice points; must be a power of two.
    """

    def __init__(self, x_min, x_max, n_points):
        if not (x_max > x_min):
            raise ConfigError(f"empty domain [{x_min}, {x_max}]")
        if n_points < 2 or (n_points & (n_points - 1)) != 0:
            raise ConfigError(f"n_points must be a power of two, got {n_points}")
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        self.n_points = int(n_points)
        self.dx = (self.x_max - self.x_min) / self.n_points

    @cached_property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def k_values(self):
        """Momentum lattice in FFT order, spanning [-pi/dx, pi/dx)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, self.dx)

    @property
    def dk(self):
        return 2.0 * np.pi / (self.n_points * self.dx)

    @property
    def k_max(self):
        return np.pi / self.dx

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.x_min, self.x_max, self.n_points) == (
            other.x_min,
            other.x_max,
            other.n_points,
        )

    def __hash__(self):
        return hash((self.x_min, self.x_max, self.n_points))

    def __repr__(self):
        return f"Grid(x_min={self.x_min}, x_max={self.x_max}, n_points={self.n_points})"

    def widened(self):
        """Domain doubled about its center, keeping dx (n_points doubled)."""
        center = 0.5 * (self.x_min + self.x_max)
        half = self.x_max - self.x_min
        return Grid(center - half, center + half, 2 * self.n_points)

    def refined(self):
        """Same domain with twice the points (halved dx, doubled k range)."""
        return Grid(self.x_min, self.x_max, 2 * self.n_points)


@dataclass
class Wavefunction:
    """Complex amplitudes of a single-particle state on a :class:`Grid`.

    ``space`` is either ``"position"`` or ``"momentum"``; the integration
    weight for norms and inner products is ``dx`` or ``dk`` accordingly.
    ``trajectory`` is filled by the propagator when snapshot recording is
    requested.
    """

    grid: Grid
    amplitudes: np.ndarray
    space: str = "position"
    trajectory: "Trajectory | None" = field(default=None, compare=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"amplitude vector of length {self.amplitudes.shape} "
                f"does not match grid with {self.grid.n_points} points"
            )
        if self.space not in ("position", "momentum"):
            raise ConfigError(f"unknown space {self.space!r}")

    @property
    def weight(self):
        return self.grid.dx if self.space == "position" else self.grid.dk

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.weight))

    def normalized(self):
        return Wavefunction(self.grid, self.amplitudes / self.norm, self.space)

    def edge_amplitude_ratio(self):
        """max(|amplitude at either boundary|) / max|amplitude|."""
        a = np.abs(self.amplitudes)
        peak = a.max()
        if peak == 0.0:
            return 0.0
        return float(max(a[0], a[-1]) / peak)

    def is_contained(self, tol=EDGE_AMPLITUDE_TOL):
        return self.edge_amplitude_ratio() < tol


@dataclass
class Trajectory:
    """Sampled snapshots of a propagation (times and position amplitudes)."""

    times: np.ndarray
    amplitudes: np.ndarray  # shape (n_samples, n_points)


def _check_compatible(a, b):
    if a.grid != b.grid:
        raise GridMismatchError("wavefunctions live on different grids")
    if a.space != b.space:
        raise GridMismatchError(
            f"cannot combine {a.space}-space with {b.space}-space states"
        )


def inner_product(a, b):
    """<a|b> = sum(conj(a) * b) * weight, antilinear in the first slot."""
    _check_compatible(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.weight)


def to_momentum(w):
    """Unitary map to the momentum representation.

    The amplitudes approximate the continuum Fourier transform
    ``(1/sqrt(2*pi)) * integral(psi(x) * exp(-i*k*x) dx)`` sampled on the
    momentum lattice (FFT order), so Parseval's identity holds exactly with
    the ``dk`` weight.
    """
    if w.space != "position":
        raise GridMismatchError("to_momentum expects a position-space state")
    g = w.grid
    ft = scipy.fft.fft(w.amplitudes)
    amps = (g.dx / np.sqrt(2.0 * np.pi)) * np.exp(-1j * g.k_values * g.x_min) * ft
    return Wavefunction(g, amps, "momentum")


def to_position(w):
    """Inverse of :func:`to_momentum`."""
    if w.space != "momentum":
        raise GridMismatchError("to_position expects a momentum-space state")
    g = w.grid
    ft = np.exp(1j * g.k_values * g.x_min) * w.amplitudes
    amps = (np.sqrt(2.0 * np.pi) / g.dx) * scipy.fft.ifft(ft)
    return Wavefunction(g, amps, "position")
