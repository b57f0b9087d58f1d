"""Heterodyne third-order CARS polarization in the delta-pulse, Condon limit.

The signal on the diagonal tau21 = tau43 = t is

    P(t, tau32) = eps(t) <psi0| exp(-iHe t) exp(-i(Hg - w0) tau32) exp(-iHe t) |psi0>

with eps(t) = i^3 mu^4 e1 e2 e3 exp(2i w0 t). Two routes are provided:
``synth_direct`` evaluates the sandwich by wavepacket propagation, and
``synth_closure`` evaluates the ground-state sum over c_g(t)^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolver import EigenBasis, complete_basis
from .grid import FS, fs_to_au
from .potentials import PotentialModel, sample_on_grid
from .propagator import PropagationSpec, evolve, propagate_record

#: completeness required of the closure basis before the two routes must agree
COMPLETENESS_GATE = 1e-8


class NyquistError(ValueError):
    """The tau32 sampling cannot resolve the highest requested ground frequency."""


@dataclass(frozen=True)
class PulseConfig:
    mu: float = 2.0
    eps1: float = 1e-4
    eps2: float = 1e-4
    eps3: float = 1e-4
    omega0: float = 0.0

    def __post_init__(self):
        if min(self.mu, self.eps1, self.eps2, self.eps3) <= 0:
            raise ValueError("transition dipole and pulse amplitudes must be positive")

    @property
    def strength(self) -> float:
        """mu^4 e1 e2 e3."""
        return self.mu**4 * self.eps1 * self.eps2 * self.eps3


def prefactor(pulses: PulseConfig, t_fs, t43_fs=None):
    """eps = i^3 mu^4 e1 e2 e3 exp(i w0 (tau21 + tau43)); diagonal when ``t43_fs`` is None."""
    t21 = fs_to_au(t_fs)
    t43 = t21 if t43_fs is None else fs_to_au(t43_fs)
    out = -1j * pulses.strength * np.exp(1j * pulses.omega0 * (t21 + t43))
    return complex(out) if np.ndim(out) == 0 else out


@dataclass
class SignalCube:
    """Complex P(t, tau32) on a uniform lattice; axes in femtoseconds.

    ``values`` has shape (len(t_axis), len(tau32_axis)) on the diagonal, or
    (len(t43_axis), len(t_axis), len(tau32_axis)) when ``t43_axis`` is set.
    """

    t_axis: np.ndarray
    tau32_axis: np.ndarray
    values: np.ndarray
    pulses: PulseConfig
    provenance: str
    t43_axis: np.ndarray | None = field(default=None)

    def __post_init__(self):
        for name in ("t_axis", "tau32_axis"):
            ax = np.asarray(getattr(self, name), dtype=float)
            check_axis(ax, name)
            setattr(self, name, ax)
        expected = (len(self.t_axis), len(self.tau32_axis))
        if self.t43_axis is not None:
            expected = (len(self.t43_axis),) + expected
        if self.values.shape != expected:
            raise ValueError(f"cube values have shape {self.values.shape}, axes imply {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("cube values must be finite")

    @property
    def diagonal(self) -> bool:
        return self.t43_axis is None


def uniform_axis(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform axis start, start+step, ..., stop."""
    if step <= 0:
        raise ValueError("lattice step must be positive")
    count = int(round((stop - start) / step)) + 1
    if count < 1 or abs(start + (count - 1) * step - stop) > 1e-9 * max(1.0, abs(stop)):
        raise ValueError(f"lattice [{start}, {stop}] is not a whole number of steps {step}")
    return start + step * np.arange(count)


def check_axis(ax: np.ndarray, name: str = "axis") -> None:
    if ax.ndim != 1 or ax.size == 0 or not np.all(np.isfinite(ax)):
        raise ValueError(f"{name} must be a finite non-empty 1-D array")
    if ax.size > 1:
        d = np.diff(ax)
        if np.any(d <= 0):
            raise ValueError(f"{name} must be strictly increasing")
        if np.ptp(d) > 1e-9 * max(1.0, d[0]):
            raise ValueError(f"{name} must be uniform")


def nyquist_guard(basis: EigenBasis, tau_step_fs: float, count: int | None = None, margin: float = 1.1) -> None:
    count = basis.count if count is None else count
    top = basis.shifted[count - 1]
    limit = np.pi / (tau_step_fs * FS)
    if not limit > margin * top:
        raise NyquistError(
            f"tau32 step {tau_step_fs:g} fs resolves frequencies up to {limit:.4g} hartree; "
            f"level {count - 1} needs more than {margin * top:.4g}")


def exact_correlations(basis: EigenBasis, excited: PotentialModel | np.ndarray, t_fs: np.ndarray,
                       dt_fs: float = 0.1) -> np.ndarray:
    """c_g(t) = <psi_g|exp(-iHe t)|psi_0>, shape (len(t_fs), basis.count)."""
    v = sample_on_grid(excited, basis.grid) if isinstance(excited, PotentialModel) else excited
    spec = PropagationSpec(v, basis.mass, dt_fs * FS)
    return propagate_record(basis.grid, basis.psi0, spec, fs_to_au(t_fs), basis.functions)


def completeness_deficit(corr: np.ndarray) -> float:
    """max_t (1 - sum_g |c_g(t)|^2)."""
    return float(np.max(1.0 - np.sum(np.abs(corr) ** 2, axis=-1)))


def synth_direct(basis: EigenBasis, excited: PotentialModel | np.ndarray, pulses: PulseConfig,
                 t_fs: np.ndarray, tau32_fs: np.ndarray, *, dt_fs: float = 0.1,
                 t43_fs: np.ndarray | None = None) -> SignalCube:
    """Signal from the propagated wavepackets, without any basis truncation.

    The excited-state legs are split-operator propagations: a(t) forward
    from psi0, and xi(t) backward from psi0 for the bra. The ground-state
    leg uses the complete set of grid eigenpairs, so exp(-i Hg tau32) is
    exact for the grid Hamiltonian at every tau32.
    """
    t_fs = np.asarray(t_fs, float)
    tau32_fs = np.asarray(tau32_fs, float)
    check_axis(t_fs, "t axis")
    check_axis(tau32_fs, "tau32 axis")
    nyquist_guard(basis, tau32_fs[1] - tau32_fs[0] if len(tau32_fs) > 1 else np.inf)
    grid = basis.grid
    v = sample_on_grid(excited, grid) if isinstance(excited, PotentialModel) else np.asarray(excited, float)
    spec = PropagationSpec(v, basis.mass, dt_fs * FS)
    ket, _ = evolve(grid, basis.psi0, spec, fs_to_au(t_fs), watch_edges=True)
    bra_t = t_fs if t43_fs is None else np.asarray(t43_fs, float)
    if t43_fs is not None:
        check_axis(bra_t, "t43 axis")
    bra, _ = evolve(grid, basis.psi0, spec.reversed(), fs_to_au(bra_t), watch_edges=True)

    full = complete_basis(basis)
    phases = np.exp(-1j * np.outer(full.shifted, fs_to_au(tau32_fs)))
    right = full.project(ket)
    left = full.project(bra.conj())
    if t43_fs is None:
        vals = (left * right) @ phases * prefactor(pulses, t_fs)[:, None]
    else:
        vals = np.einsum("ak,bk,kt->abt", left, right, phases)
        vals *= prefactor(pulses, t_fs[None, :], bra_t[:, None])[..., None]
    return SignalCube(t_fs, tau32_fs, vals, pulses, "direct", None if t43_fs is None else bra_t)


def synth_closure(basis: EigenBasis, corr: np.ndarray, pulses: PulseConfig, t_fs: np.ndarray,
                  tau32_fs: np.ndarray) -> SignalCube:
    """eps(t) sum_g exp(-i w~_g tau32) c_g(t)^2 over the supplied basis."""
    corr = np.asarray(corr)
    t_fs = np.asarray(t_fs, float)
    tau32_fs = np.asarray(tau32_fs, float)
    if corr.ndim != 2 or corr.shape[1] != basis.count:
        raise ValueError(f"correlations of shape {corr.shape} do not match a {basis.count}-state basis")
    if corr.shape[0] != len(t_fs):
        raise ValueError("correlations and t axis differ in length")
    check_axis(tau32_fs, "tau32 axis")
    nyquist_guard(basis, tau32_fs[1] - tau32_fs[0] if len(tau32_fs) > 1 else np.inf)
    phases = np.exp(-1j * np.outer(basis.shifted, fs_to_au(tau32_fs)))
    vals = (corr**2) @ phases * prefactor(pulses, t_fs)[:, None]
    return SignalCube(t_fs, tau32_fs, vals, pulses, "closure")


def closure_count(corr: np.ndarray, gate: float = COMPLETENESS_GATE) -> int | None:
    """Smallest number of leading basis states meeting the completeness gate."""
    cum = np.cumsum(np.abs(corr) ** 2, axis=1)
    ok = np.all(1.0 - cum <= gate, axis=0)
    hits = np.flatnonzero(ok)
    return int(hits[0]) + 1 if hits.size else None
