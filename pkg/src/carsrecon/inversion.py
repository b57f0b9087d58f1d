"""Recovery of the cross-correlations c_g(t) from a diagonal CARS cube.

Pipeline: windowed Fourier transform over tau32, a square sinc-matrix
solve around each ground-state peak, removal of the known pulse prefactor
and a continuity-tracked complex square root.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenBasis
from .grid import fs_to_au
from .synth import PulseConfig, SignalCube, prefactor

log = logging.getLogger(__name__)

#: relative singular-value cutoff of the regularised peak solve
RCOND = 1e-14
#: condition number above which the peak solve is regularised
COND_LIMIT = 1e8
#: |r| below this fraction of max |r| marks a low-confidence branch sample
BRANCH_FRACTION = 1e-3


@dataclass
class SpectralSlice:
    """Windowed transform of a cube at a set of frequencies.

    ``values[j, i]`` is the transform of row ``t_axis[j]`` at ``omega[i]``
    (hartree). ``tau_au`` and ``weights`` describe the quadrature actually
    applied, so the matching kernel can be rebuilt exactly.
    """

    t_axis: np.ndarray
    omega: np.ndarray
    values: np.ndarray
    tau_au: np.ndarray
    weights: np.ndarray

    @property
    def tau_min(self) -> float:
        return float(self.tau_au[0])

    @property
    def tau_max(self) -> float:
        return float(self.tau_au[-1])

    @property
    def half_width(self) -> float:
        return 0.5 * (self.tau_max - self.tau_min)


@dataclass
class PeakSolution:
    values: np.ndarray
    condition: float
    rank: int
    regularized: bool


@dataclass
class CorrelationSet:
    """Recovered c~_g(t) = a_g c_g(t), columns indexed by g."""

    t_axis: np.ndarray
    values: np.ndarray
    confident: np.ndarray
    squared: np.ndarray | None = None
    conditions: np.ndarray | None = None

    @property
    def count(self) -> int:
        return self.values.shape[1]

    def truncated(self, count: int) -> "CorrelationSet":
        cut = lambda a: None if a is None else a[..., :count]
        return CorrelationSet(self.t_axis, self.values[:, :count], self.confident[:, :count],
                              cut(self.squared), None if self.conditions is None else self.conditions[:count])


def trapezoid_weights(n: int, step: float) -> np.ndarray:
    w = np.full(n, step, dtype=float)
    if n > 1:
        w[0] = w[-1] = 0.5 * step
    return w


def windowed_ft(cube: SignalCube, omega) -> SpectralSlice:
    """sum_j w_j P(t, tau_j) exp(i omega tau_j) over the measured tau32 range.

    Trapezoid weights make the sum a second-order quadrature of the
    rectangular-window integral between the first and last delay.
    """
    if not cube.diagonal:
        raise ValueError("windowed_ft works on the diagonal tau21 = tau43 cube")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if cube.values.size == 0:
        raise ValueError("empty signal lattice")
    if not np.all(np.isfinite(omega)):
        raise ValueError("frequencies must be finite")
    tau = fs_to_au(cube.tau32_axis)
    step = tau[1] - tau[0] if len(tau) > 1 else 0.0
    w = trapezoid_weights(len(tau), step)
    kern = np.exp(1j * np.outer(tau, omega)) * w[:, None]
    return SpectralSlice(cube.t_axis, omega, cube.values @ kern, tau, w)


def sinc_kernel(omega, g: int, basis: EigenBasis, half_width: float, tau_min: float,
                pulses: PulseConfig, t_fs: float = 0.0):
    """Continuous rectangular-window response 2T eps e^{i d (tau_min + T)} sinc(d T), d = omega - w~_g."""
    d = np.asarray(omega, dtype=float) - basis.shifted[g]
    sinc = np.sinc(d * half_width / np.pi)
    out = 2.0 * half_width * prefactor(pulses, t_fs) * np.exp(1j * d * (tau_min + half_width)) * sinc
    return complex(out) if np.ndim(out) == 0 else out


def discrete_kernel(omega: np.ndarray, shifted: np.ndarray, tau_au: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """K[i, g] = sum_j w_j exp(i (omega_i - w~_g) tau_j), the prefactor-free kernel of ``windowed_ft``."""
    left = np.exp(1j * np.outer(omega, tau_au)) * weights[None, :]
    return left @ np.exp(-1j * np.outer(tau_au, shifted))


def peak_samples(shifted: np.ndarray, g_star: int, count: int | None = None) -> np.ndarray:
    """``count`` uniform frequencies spanning w~_g* +- half the smaller neighbouring gap."""
    count = len(shifted) if count is None else count
    gaps = []
    if g_star > 0:
        gaps.append(shifted[g_star] - shifted[g_star - 1])
    if g_star < len(shifted) - 1:
        gaps.append(shifted[g_star + 1] - shifted[g_star])
    if not gaps:
        return np.array([shifted[g_star]])
    half = 0.5 * min(gaps)
    return shifted[g_star] + np.linspace(-half, half, count)


def solve_kernel(kernel: np.ndarray, rhs: np.ndarray, *, rcond: float = RCOND,
                 cond_limit: float = COND_LIMIT) -> tuple[np.ndarray, float, int, bool]:
    """Solve kernel @ x = rhs for each column of rhs; truncated SVD when ill-conditioned."""
    u, s, vh = np.linalg.svd(kernel)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if cond <= cond_limit:
        return np.linalg.solve(kernel, rhs), cond, len(s), False
    keep = s > rcond * s[0]
    x = vh[keep].conj().T @ ((u[:, keep].conj().T @ rhs) / s[keep, None])
    return x, cond, int(keep.sum()), True


def invert_peak(sl: SpectralSlice, basis: EigenBasis, g_star: int, *, rcond: float = RCOND,
                cond_limit: float = COND_LIMIT) -> PeakSolution:
    """Isolate eps(t) P_g*(t) from a slice sampled around peak ``g_star``.

    The slice must hold exactly ``basis.count`` frequencies so the kernel
    is square. Returned values still carry the pulse prefactor.
    """
    if len(sl.omega) != basis.count:
        raise ValueError(f"slice has {len(sl.omega)} frequencies; the square solve needs {basis.count}")
    if not 0 <= g_star < basis.count:
        raise ValueError(f"peak index {g_star} outside basis of {basis.count}")
    kern = discrete_kernel(sl.omega, basis.shifted, sl.tau_au, sl.weights)
    x, cond, rank, reg = solve_kernel(kern, sl.values.T, rcond=rcond, cond_limit=cond_limit)
    if reg:
        log.debug("peak %d: condition %.3g, truncated SVD kept %d of %d", g_star, cond, rank, basis.count)
    return PeakSolution(x[g_star], cond, rank, reg)


def strip_prefactor(values: np.ndarray, pulses: PulseConfig, t_fs: np.ndarray) -> np.ndarray:
    return np.asarray(values) / prefactor(pulses, t_fs)


def sqrt_branch(q: np.ndarray, fraction: float = BRANCH_FRACTION) -> tuple[np.ndarray, np.ndarray]:
    """Continuous square root of a sampled complex function.

    At each sample the root nearer to the polynomial extrapolation of the
    previously chosen roots is taken (quadratic once three are available).
    The first root has a non-negative real part. The second array flags
    samples where |q| exceeds ``fraction**2 * max|q|``.
    """
    q = np.asarray(q, dtype=complex)
    roots = np.sqrt(q)
    r = np.empty_like(roots)
    if q.size == 0:
        return r, np.zeros(0, dtype=bool)
    r[0] = roots[0] if roots[0].real >= 0 else -roots[0]
    for j in range(1, len(q)):
        if j >= 3:
            guess = 3.0 * r[j - 1] - 3.0 * r[j - 2] + r[j - 3]
        elif j == 2:
            guess = 2.0 * r[1] - r[0]
        else:
            guess = r[0]
        s = roots[j]
        r[j] = s if abs(s - guess) <= abs(s + guess) else -s
    top = np.abs(q).max()
    confident = np.abs(q) >= fraction**2 * top if top > 0 else np.zeros(len(q), dtype=bool)
    return r, confident


def recover_correlations(cube: SignalCube, basis: EigenBasis, *, rcond: float = RCOND,
                         cond_limit: float = COND_LIMIT) -> CorrelationSet:
    """Steps 1-4: per-peak inversion of the cube followed by the branch-tracked square root."""
    n = basis.count
    sq = np.empty((len(cube.t_axis), n), dtype=complex)
    conds = np.empty(n)
    for g in range(n):
        sl = windowed_ft(cube, peak_samples(basis.shifted, g, n))
        sol = invert_peak(sl, basis, g, rcond=rcond, cond_limit=cond_limit)
        sq[:, g] = strip_prefactor(sol.values, cube.pulses, cube.t_axis)
        conds[g] = sol.condition
    vals = np.empty_like(sq)
    conf = np.empty(sq.shape, dtype=bool)
    for g in range(n):
        vals[:, g], conf[:, g] = sqrt_branch(sq[:, g])
    return CorrelationSet(np.asarray(cube.t_axis), vals, conf, sq, conds)


def sign_oracle(recovered: np.ndarray, exact: np.ndarray) -> np.ndarray:
    """Per-column sign a_g minimising max_t |recovered - a_g exact|."""
    plus = np.abs(recovered - exact).max(axis=0)
    minus = np.abs(recovered + exact).max(axis=0)
    return np.where(plus <= minus, 1, -1)
