"""Uniform periodic coordinate grid and the spectral operations defined on it.

Everything is in atomic units (hbar = 1, bohr, hartree). Delays given in
femtoseconds are converted with :data:`FS`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: atomic units of time per femtosecond
FS = 41.341374575751


def fs_to_au(t_fs):
    return np.asarray(t_fs, dtype=float) * FS


def au_to_fs(t_au):
    return np.asarray(t_au, dtype=float) / FS


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic grid on ``[x_min, x_max)``; ``x_max`` itself is not a point."""

    x_min: float
    x_max: float
    n: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT (wrap-around) order."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        k.flags.writeable = False
        return k

    @property
    def k_max(self) -> float:
        return np.pi / self.dx

    def check(self, *fields: np.ndarray) -> None:
        for f in fields:
            if np.shape(f)[-1] != self.n:
                raise ValueError(f"field of length {np.shape(f)[-1]} does not live on a grid of {self.n} points")


def make_grid(x_min: float, x_max: float, n: int) -> Grid:
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or x_max <= x_min:
        raise ValueError(f"degenerate grid range [{x_min}, {x_max}]")
    if int(n) != n or not _is_power_of_two(int(n)) or n < 8:
        raise ValueError(f"grid size must be a power of two >= 8, got {n}")
    return Grid(float(x_min), float(x_max), int(n))


def inner_product(grid: Grid, a: np.ndarray, b: np.ndarray) -> complex:
    """Discrete <a|b> = sum conj(a) b dx."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"field shapes differ: {a.shape} vs {b.shape}")
    grid.check(a)
    return complex(np.vdot(a, b) * grid.dx)


def norm(grid: Grid, f: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(f) ** 2) * grid.dx))


def to_momentum(f: np.ndarray) -> np.ndarray:
    return np.fft.fft(f, axis=-1)


def from_momentum(v: np.ndarray) -> np.ndarray:
    return np.fft.ifft(v, axis=-1)


def spectral_second_derivative(grid: Grid, f: np.ndarray) -> np.ndarray:
    """d^2 f/dx^2 by multiplication with -k^2 in momentum space.

    Exact for fields band-limited to the grid's momentum range. Real input
    gives real output.
    """
    f = np.asarray(f)
    grid.check(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite field")
    out = from_momentum(-(grid.k**2) * to_momentum(f))
    return out.real if np.isrealobj(f) else out
