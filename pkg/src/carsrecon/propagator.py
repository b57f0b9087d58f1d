"""Split-operator (Strang) time evolution on a periodic grid."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .grid import Grid

log = logging.getLogger(__name__)

#: amplitude fraction at the grid edges that triggers a logged warning
EDGE_WARN = 1e-6
#: amplitude fraction at the grid edges that aborts a propagation
EDGE_ABORT = 1e-2
EDGE_POINTS = 5


class BoundaryLeakError(RuntimeError):
    """The wavepacket reached the periodic boundary of the grid."""


@dataclass(frozen=True)
class PropagationSpec:
    potential: np.ndarray
    mass: float
    dt: float
    direction: str = "forward"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"direction must be 'forward' or 'backward', got {self.direction!r}")

    @property
    def signed_dt(self) -> float:
        return self.dt if self.direction == "forward" else -self.dt

    def reversed(self) -> "PropagationSpec":
        other = "backward" if self.direction == "forward" else "forward"
        return PropagationSpec(self.potential, self.mass, self.dt, other)


class SplitOperator:
    """Precomputed Strang step exp(-iV dt/2) F^-1 exp(-i k^2 dt/2m) F exp(-iV dt/2).

    Works on a single field or on a stack of fields along the leading axes.
    """

    def __init__(self, grid: Grid, spec: PropagationSpec):
        v = np.asarray(spec.potential, dtype=float)
        grid.check(v)
        self.grid = grid
        self.spec = spec
        h = spec.signed_dt
        self._half_v = np.exp(-0.5j * h * v)
        self._kin = np.exp(-0.5j * h * grid.k**2 / spec.mass)

    def step(self, psi: np.ndarray) -> np.ndarray:
        psi = self._half_v * psi
        psi = np.fft.ifft(self._kin * np.fft.fft(psi, axis=-1), axis=-1)
        return self._half_v * psi

    def run(self, psi: np.ndarray, steps: int, *, watch_edges: bool = False) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        for _ in range(steps):
            psi = self.step(psi)
        if watch_edges:
            report_edges(check_edges(psi))
        return psi


def edge_fraction(psi: np.ndarray, points: int = EDGE_POINTS) -> float:
    a = np.abs(psi)
    top = a.max()
    if top == 0:
        return 0.0
    edges = np.concatenate([a[..., :points].ravel(), a[..., -points:].ravel()])
    return float(edges.max() / top)


def check_edges(psi: np.ndarray, abort: float = EDGE_ABORT) -> float:
    frac = edge_fraction(psi)
    if frac > abort:
        raise BoundaryLeakError(f"edge amplitude {frac:.3g} of maximum exceeds {abort:g}; enlarge the grid")
    return frac


def report_edges(frac: float, warn: float = EDGE_WARN) -> None:
    if frac > warn:
        log.warning("wavepacket edge amplitude reached %.3g of its maximum (warning level %g)", frac, warn)


def split_step(grid: Grid, psi: np.ndarray, spec: PropagationSpec) -> np.ndarray:
    grid.check(psi)
    return SplitOperator(grid, spec).step(np.asarray(psi, dtype=complex))


def steps_for(duration: float, dt: float, what: str = "time") -> int:
    """Number of dt steps in ``duration``; raises if not commensurate."""
    ratio = duration / dt
    steps = int(round(ratio))
    if abs(ratio - steps) > 1e-6 * max(1.0, abs(ratio)) or steps < 0:
        raise ValueError(f"{what} {duration:g} is not a non-negative multiple of dt = {dt:g}")
    return steps


def evolve(grid: Grid, psi0: np.ndarray, spec: PropagationSpec, times: np.ndarray,
           *, watch_edges: bool = True) -> tuple[np.ndarray, float]:
    """States at each of the uniform ``times`` (a.u., starting at 0).

    Returns the stacked states and the largest edge-amplitude fraction seen.
    """
    times = np.asarray(times, dtype=float)
    _check_uniform(times)
    grid.check(psi0)
    stride = steps_for(times[1] - times[0], spec.dt, "time step") if len(times) > 1 else 0
    start = steps_for(times[0], spec.dt, "first time")
    op = SplitOperator(grid, spec)
    psi = op.run(np.asarray(psi0, dtype=complex), start)
    out = np.empty((len(times), grid.n), dtype=complex)
    worst = 0.0
    for j in range(len(times)):
        if j:
            psi = op.run(psi, stride)
        out[j] = psi
        if watch_edges:
            worst = max(worst, check_edges(psi))
    report_edges(worst)
    return out, worst


def propagate_record(grid: Grid, psi0: np.ndarray, spec: PropagationSpec, times: np.ndarray,
                     probes: np.ndarray) -> np.ndarray:
    """Overlaps <probe_p|psi(t_j)>, shape (len(times), len(probes)).

    With the ground eigenbasis as probes this is the cross-correlation
    c_g(t) = <psi_g|exp(-iHt)|psi_0>.
    """
    probes = np.atleast_2d(probes)
    grid.check(probes)
    times = np.asarray(times, dtype=float)
    _check_uniform(times)
    stride = steps_for(times[1] - times[0], spec.dt, "time step") if len(times) > 1 else 0
    start = steps_for(times[0], spec.dt, "first time")
    op = SplitOperator(grid, spec)
    psi = op.run(np.asarray(psi0, dtype=complex), start)
    bra = probes.conj() * grid.dx
    out = np.empty((len(times), len(probes)), dtype=complex)
    worst = 0.0
    for j in range(len(times)):
        if j:
            psi = op.run(psi, stride)
        worst = max(worst, check_edges(psi))
        out[j] = bra @ psi
    report_edges(worst)
    return out


def backward_to_zero(grid: Grid, psi_t: np.ndarray, potential: np.ndarray, mass: float,
                     t_star: float, dt: float) -> np.ndarray:
    """Propagate a state from time ``t_star`` back to 0 under a static potential."""
    grid.check(psi_t)
    steps = steps_for(t_star, dt, "t_star")
    return SplitOperator(grid, PropagationSpec(potential, mass, dt, "backward")).run(psi_t, steps)


def energy(grid: Grid, psi: np.ndarray, potential: np.ndarray, mass: float) -> float:
    """<psi|T + V|psi> with the kinetic term evaluated spectrally."""
    kin = np.fft.ifft(grid.k**2 / (2.0 * mass) * np.fft.fft(psi))
    return float(np.real(np.vdot(psi, kin + potential * psi)) * grid.dx)


def _check_uniform(times: np.ndarray) -> None:
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a non-empty 1-D array")
    if times.size > 2:
        d = np.diff(times)
        if np.any(d <= 0) or np.ptp(d) > 1e-9 * max(1.0, abs(d[0])):
            raise ValueError("time grid must be uniform and increasing")
