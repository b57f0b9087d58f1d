"""Fourier-grid Hamiltonian eigenpairs for the ground electronic state."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .grid import Grid
from .potentials import PotentialKind, PotentialModel, sample_on_grid

log = logging.getLogger(__name__)


def kinetic_matrix(grid: Grid, mass: float) -> np.ndarray:
    """Dense real kinetic-energy matrix F^-1 diag(k^2/2m) F.

    The operator is circulant; its first column is the inverse transform
    of k^2/2m. The column is symmetrised so the matrix is exactly
    symmetric in floating point.
    """
    if mass <= 0:
        raise ValueError("mass must be positive")
    col = np.fft.ifft(grid.k**2 / (2.0 * mass)).real
    col = 0.5 * (col + np.roll(col[::-1], 1))
    idx = (np.arange(grid.n)[:, None] - np.arange(grid.n)[None, :]) % grid.n
    return col[idx]


def build_hamiltonian(grid: Grid, potential: PotentialModel | np.ndarray, mass: float) -> np.ndarray:
    v = sample_on_grid(potential, grid) if isinstance(potential, PotentialModel) else np.asarray(potential, float)
    grid.check(v)
    h = kinetic_matrix(grid, mass)
    h[np.diag_indices(grid.n)] += v
    return h


@dataclass(frozen=True)
class EigenBasis:
    """Lowest vibrational eigenpairs on a grid.

    ``functions[g]`` is real and normalised so that ``sum(psi**2) * dx == 1``;
    its largest-magnitude sample is positive.
    """

    grid: Grid
    mass: float
    energies: np.ndarray
    functions: np.ndarray
    potential: np.ndarray = field(repr=False)
    unbound: np.ndarray = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return len(self.energies)

    @property
    def omega0(self) -> float:
        return float(self.energies[0])

    @property
    def shifted(self) -> np.ndarray:
        """Frequencies relative to the zero-point level."""
        return self.energies - self.energies[0]

    @property
    def psi0(self) -> np.ndarray:
        return self.functions[0]

    def truncated(self, count: int) -> "EigenBasis":
        if not 1 <= count <= self.count:
            raise ValueError(f"cannot truncate a {self.count}-state basis to {count}")
        return EigenBasis(self.grid, self.mass, self.energies[:count], self.functions[:count],
                          self.potential, None if self.unbound is None else self.unbound[:count])

    def project(self, f: np.ndarray) -> np.ndarray:
        """Coefficients <psi_g|f> for a field (or a stack of fields along axis 0)."""
        return np.asarray(f) @ self.functions.T * self.grid.dx


def eigenpairs(h: np.ndarray, grid: Grid, count: int, *, mass: float, potential: np.ndarray,
               limit: float | None = None) -> EigenBasis:
    """Diagonalise ``h`` and keep the ``count`` lowest states.

    ``limit`` is the dissociation energy, if any; states at or above it are
    flagged in ``unbound`` and a warning is issued.
    """
    if not 1 <= count <= grid.n:
        raise ValueError(f"count must be between 1 and {grid.n}, got {count}")
    w, u = scipy.linalg.eigh(h, subset_by_index=(0, count - 1))
    u = u.T / np.sqrt(grid.dx)
    peak = np.argmax(np.abs(u), axis=1)
    u *= np.sign(u[np.arange(count), peak])[:, None]
    unbound = np.zeros(count, dtype=bool)
    if limit is not None:
        unbound = w >= limit
        if unbound.any():
            msg = f"{int(unbound.sum())} of {count} requested levels lie above the dissociation limit {limit:g}"
            log.warning(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return EigenBasis(grid, float(mass), w, u, np.asarray(potential, float), unbound)


def ground_basis(grid: Grid, model: PotentialModel, mass: float, count: int) -> EigenBasis:
    v = sample_on_grid(model, grid)
    h = build_hamiltonian(grid, v, mass)
    limit = model.asymptote if model.kind is PotentialKind.MORSE else None
    return eigenpairs(h, grid, count, mass=mass, potential=v, limit=limit)


def complete_basis(basis: EigenBasis) -> EigenBasis:
    """All ``grid.n`` eigenpairs of the Hamiltonian that produced ``basis``."""
    if basis.count == basis.grid.n:
        return basis
    h = build_hamiltonian(basis.grid, basis.potential, basis.mass)
    return eigenpairs(h, basis.grid, basis.grid.n, mass=basis.mass, potential=basis.potential)


def morse_bound_count(m: PotentialModel, mass: float) -> int:
    """Number of bound levels of a Morse oscillator on the infinite line."""
    if m.kind is not PotentialKind.MORSE:
        raise ValueError("Morse formula needs a Morse potential")
    lam = np.sqrt(2.0 * mass * m.D) / m.b
    return int(np.floor(lam - 0.5)) + 1


def analytic_morse_levels(m: PotentialModel, mass: float, g):
    """E_g = w(g+1/2) - [w(g+1/2)]^2/(4D) + T with w = b sqrt(2D/mass)."""
    g_arr = np.asarray(g)
    if np.any(g_arr < 0) or np.any(g_arr >= morse_bound_count(m, mass)):
        raise ValueError(f"level index {g} is not bound (bound count {morse_bound_count(m, mass)})")
    we = m.b * np.sqrt(2.0 * m.D / mass)
    e = we * (g_arr + 0.5)
    out = e - e**2 / (4.0 * m.D) + m.T
    return float(out) if out.ndim == 0 else out
