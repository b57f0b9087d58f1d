"""Potential from wavefunction snapshots by inverting the time-dependent Schroedinger equation.

    V(x) = [i dPsi/dt + (1/2m) d^2Psi/dx^2] / Psi

with an 8th-order central difference in time (nine snapshots) and the
3-point stencil in space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

#: 8th-order central first-derivative weights for offsets -4..4
TIME_STENCIL = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
#: default amplitude cutoff, relative to max |Psi|
ETA = 1e-2
#: share of |Psi|^2 the mask must capture before coverage is considered adequate
COVERAGE_WARN = 0.99


@dataclass
class PotentialEstimate:
    """Recovered potential with validity information.

    ``values`` is the real part; ``residue`` the imaginary part, which is
    zero for exact input. Points outside ``mask`` carry NaN unless they were
    filled by interpolation (``filled``).
    """

    grid: Grid
    values: np.ndarray
    mask: np.ndarray
    residue: np.ndarray
    amplitude: np.ndarray
    times: tuple = ()
    filled: np.ndarray = field(default=None)
    captured: float = 1.0

    def __post_init__(self):
        if self.filled is None:
            self.filled = np.zeros(self.grid.n, dtype=bool)

    @property
    def valid(self) -> np.ndarray:
        return self.mask | self.filled

    def span(self) -> tuple[float, float]:
        x = self.grid.x[self.mask]
        return (float(x.min()), float(x.max())) if x.size else (np.nan, np.nan)


def fd_time_derivative(snapshots: np.ndarray, dt: float, times=None) -> np.ndarray:
    """d/dt at the centre of nine uniformly spaced snapshots (axis 0)."""
    snapshots = np.asarray(snapshots)
    if snapshots.shape[0] != 9:
        raise ValueError(f"need exactly 9 snapshots, got {snapshots.shape[0]}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if times is not None:
        d = np.diff(np.asarray(times, dtype=float))
        if np.any(np.abs(d - dt) > 1e-9 * dt):
            raise ValueError("snapshots are not uniformly spaced by dt")
    # pairwise differences keep the antisymmetry exact, so constants give exactly 0
    out = sum(TIME_STENCIL[4 + k] * (snapshots[4 + k] - snapshots[4 - k]) for k in range(1, 5))
    return out / dt


def fd_space_second(grid: Grid, f: np.ndarray) -> np.ndarray:
    """(f[j-1] - 2 f[j] + f[j+1]) / dx^2 with periodic wrap along the last axis."""
    f = np.asarray(f)
    grid.check(f)
    return (np.roll(f, 1, axis=-1) - 2.0 * f + np.roll(f, -1, axis=-1)) / grid.dx**2


def invert_tdse(grid: Grid, snapshots: np.ndarray, mass: float, dt: float, eta: float = ETA,
                times=None) -> PotentialEstimate:
    """Potential at the centre snapshot of nine fields spaced ``dt`` apart (a.u.)."""
    snapshots = np.asarray(snapshots, dtype=complex)
    grid.check(snapshots)
    centre = snapshots[4]
    amp = np.abs(centre)
    top = amp.max()
    if not top > 0:
        raise ValueError("centre snapshot is identically zero")
    mask = amp >= eta * top
    if not mask.any():
        raise ValueError("every grid point is masked")
    num = 1j * fd_time_derivative(snapshots, dt, times) + fd_space_second(grid, centre) / (2.0 * mass)
    v = np.full(grid.n, np.nan, dtype=complex)
    v[mask] = num[mask] / centre[mask]
    weight = amp**2
    captured = float(weight[mask].sum() / weight.sum())
    t_mid = () if times is None else (float(np.asarray(times)[4]),)
    return PotentialEstimate(grid, v.real, mask, v.imag, amp, t_mid, captured=captured)


def merge_snapshots(estimates: list[PotentialEstimate], rule: str = "max_amplitude") -> PotentialEstimate:
    """Combine estimates from different times into one potential.

    With ``rule="max_amplitude"`` each point takes the value from the
    estimate whose snapshot had the largest |Psi| there; ``"average"``
    weights valid estimates by |Psi|^2. The mask is the union; gaps inside
    its hull are linearly interpolated and flagged in ``filled``.
    """
    if not estimates:
        raise ValueError("nothing to merge")
    grid = estimates[0].grid
    for e in estimates[1:]:
        if e.grid != grid:
            raise ValueError("estimates live on different grids")
    vals = np.array([e.values for e in estimates])
    res = np.array([e.residue for e in estimates])
    masks = np.array([e.mask for e in estimates])
    amps = np.array([np.where(e.mask, e.amplitude, 0.0) for e in estimates])
    mask = masks.any(axis=0)
    if rule == "max_amplitude":
        best = amps.argmax(axis=0)
        cols = np.arange(grid.n)
        v = vals[best, cols]
        r = res[best, cols]
    elif rule == "average":
        w = amps**2
        tot = np.where(mask, w.sum(axis=0), 1.0)
        v = np.nansum(np.where(masks, vals, 0.0) * w, axis=0) / tot
        r = np.nansum(np.where(masks, res, 0.0) * w, axis=0) / tot
    else:
        raise ValueError(f"unknown merge rule {rule!r}")
    v = np.where(mask, v, np.nan)
    r = np.where(mask, r, np.nan)
    filled = np.zeros(grid.n, dtype=bool)
    idx = np.flatnonzero(mask)
    if idx.size:
        hull = np.arange(idx[0], idx[-1] + 1)
        gaps = hull[~mask[hull]]
        if gaps.size:
            v[gaps] = np.interp(grid.x[gaps], grid.x[idx], v[idx])
            r[gaps] = np.interp(grid.x[gaps], grid.x[idx], r[idx])
            filled[gaps] = True
    amp = np.max(np.array([e.amplitude for e in estimates]), axis=0)
    times = tuple(t for e in estimates for t in e.times)
    captured = min(e.captured for e in estimates)
    return PotentialEstimate(grid, v, mask, r, amp, times, filled, captured)


def extend_potential(est: PotentialEstimate, edge_points: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Full-grid potential for propagation.

    Values outside the valid region are continued by straight lines fitted
    to the outermost ``edge_points`` valid samples on each side. Returns
    the array and a flag of extrapolated points.
    """
    x = est.grid.x
    ok = np.flatnonzero(est.valid)
    if ok.size == 0:
        raise ValueError("estimate has no valid points")
    v = np.array(est.values, dtype=float)
    lo, hi = ok[0], ok[-1]
    out = np.zeros(est.grid.n, dtype=bool)
    out[:lo] = True
    out[hi + 1:] = True
    if ok.size == 1:
        v[out] = v[lo]
        return v, out
    k = min(edge_points, ok.size)
    left = np.polyfit(x[lo:lo + k], v[lo:lo + k], 1)
    right = np.polyfit(x[hi - k + 1:hi + 1], v[hi - k + 1:hi + 1], 1)
    v[:lo] = np.polyval(left, x[:lo])
    v[hi + 1:] = np.polyval(right, x[hi + 1:])
    return v, out
