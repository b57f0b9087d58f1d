"""Sign resolution: choose a_g so that sum_g a_g c~_g(t) psi_g(x) is the physical wavepacket.

Each candidate field is pushed through the TDSE inversion at a few times;
only the physical one yields a time-independent potential. The spread of
that potential over time (``variance_score``) ranks candidates, and
back-propagation to t = 0 under the candidate's own potential
(``backprop_score``) confirms the choice.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import EigenBasis, kinetic_matrix
from .grid import FS, Grid
from .inversion import CorrelationSet
from .potinv import ETA, TIME_STENCIL, PotentialEstimate, extend_potential, invert_tdse, merge_snapshots
from .propagator import backward_to_zero

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 16
STRATEGIES = ("exhaustive", "beam", "greedy")


@dataclass(order=False)
class SignCandidate:
    signs: np.ndarray
    variance: float = np.nan
    fidelity: float = np.nan

    def __post_init__(self):
        self.signs = np.asarray(self.signs, dtype=int)
        if not np.all(np.isin(self.signs, (-1, 1))):
            raise ValueError("sign entries must be +1 or -1")
        if self.signs.size and self.signs[0] != 1:
            raise ValueError("the g = 0 sign is fixed to +1")

    def rank_key(self):
        f = -self.fidelity if np.isfinite(self.fidelity) else np.inf
        return (self.variance, f, tuple(self.signs))

    @property
    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass
class ReconstructedField:
    """Psi~(x, t) = sum_g a_g c~_g(t) psi_g(x) at the rows of ``t_axis`` (fs).

    The physical wavepacket is ``prefactor * values``; the constant
    i mu eps1 is tracked here and never divided out.
    """

    grid: Grid
    t_axis: np.ndarray
    values: np.ndarray
    signs: np.ndarray
    prefactor: complex = 1.0

    def row(self, t_fs: float) -> np.ndarray:
        return self.values[row_index(self.t_axis, t_fs)]


def row_index(axis: np.ndarray, t: float, tol: float = 1e-6) -> int:
    j = int(np.argmin(np.abs(np.asarray(axis) - t)))
    if abs(axis[j] - t) > tol:
        raise ValueError(f"time {t:g} fs is not on the axis")
    return j


def stencil_times(center: float, dt: float) -> np.ndarray:
    return center + dt * np.arange(-4, 5)


def assemble(basis: EigenBasis, corr: CorrelationSet, signs, times_fs=None, prefactor: complex = 1.0
             ) -> ReconstructedField:
    signs = np.asarray(signs)
    if len(signs) != corr.count or corr.count != basis.count:
        raise ValueError(f"lengths differ: {len(signs)} signs, {corr.count} correlations, {basis.count} basis states")
    if times_fs is None:
        rows = np.arange(len(corr.t_axis))
    else:
        rows = np.array([row_index(corr.t_axis, t) for t in np.atleast_1d(times_fs)])
    vals = (corr.values[rows] * signs) @ basis.functions
    return ReconstructedField(basis.grid, np.asarray(corr.t_axis)[rows], vals, signs, prefactor)


def fidelity(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| / (|a| |b|)."""
    den = np.linalg.norm(a) * np.linalg.norm(b)
    return float(abs(np.vdot(a, b)) / den) if den > 0 else 0.0


# operator algebra -----------------------------------------------------------

def projector(basis: EigenBasis) -> np.ndarray:
    return basis.functions.T @ basis.functions * basis.grid.dx


def sign_operator(basis: EigenBasis, signs) -> np.ndarray:
    """sum_g a_g |psi_g><psi_g| as a grid matrix (acting on sampled fields)."""
    signs = np.asarray(signs, dtype=float)
    if len(signs) != basis.count:
        raise ValueError("one sign per basis state required")
    return (basis.functions.T * signs) @ basis.functions * basis.grid.dx


def kinetic_defect(basis: EigenBasis, signs) -> np.ndarray:
    """Delta T = 1~ [T, 1~]."""
    s = sign_operator(basis, signs)
    t = kinetic_matrix(basis.grid, basis.mass)
    return s @ (t @ s - s @ t)


# scores ---------------------------------------------------------------------

def _batched_variance(grid: Grid, snaps: np.ndarray, mass: float, dt: float, eta: float) -> np.ndarray:
    """sigma^2 for snapshot stacks of shape (..., K, 9, n)."""
    centre = snaps[..., 4, :]
    amp = np.abs(centre)
    mask = amp >= eta * amp.max(axis=-1, keepdims=True)
    dpsi = np.tensordot(snaps, TIME_STENCIL, axes=([-2], [0])) / dt
    lap = (np.roll(centre, 1, axis=-1) - 2.0 * centre + np.roll(centre, -1, axis=-1)) / grid.dx**2
    safe = np.where(mask, centre, 1.0)
    v = np.where(mask, ((1j * dpsi + lap / (2.0 * mass)) / safe).real, 0.0)
    w = np.where(mask, amp**2, 0.0)
    tot = w.sum(axis=(-2, -1), keepdims=True)
    if np.any(tot == 0):
        raise ValueError("all points masked")
    w = w / tot
    wx = w.sum(axis=-2, keepdims=True)
    vbar = np.where(wx > 0, (w * v).sum(axis=-2, keepdims=True) / np.where(wx > 0, wx, 1.0), 0.0)
    return (w * (v - vbar) ** 2).sum(axis=(-2, -1))


def variance_score(fld: ReconstructedField, mass: float, centers_fs, dt_fs: float = 0.2,
                   eta: float = ETA) -> float:
    """Weighted time variance of the TDSE-inverted potential at nine-point stencils around each centre.

    Weights are |Psi~|^2 on unmasked points, normalised to one; the mean is
    the weighted time average at each x.
    """
    snaps = np.array([[fld.row(t) for t in stencil_times(c, dt_fs)] for c in np.atleast_1d(centers_fs)])
    return float(_batched_variance(fld.grid, snaps, mass, dt_fs * FS, eta))


def candidate_potential(fld: ReconstructedField, mass: float, snapshot_times_fs, dt_fs: float = 0.2,
                        eta: float = ETA) -> PotentialEstimate:
    ests = []
    for t in np.atleast_1d(snapshot_times_fs):
        ts = stencil_times(t, dt_fs)
        snaps = np.array([fld.row(s) for s in ts])
        ests.append(invert_tdse(fld.grid, snaps, mass, dt_fs * FS, eta, times=ts * FS))
    return merge_snapshots(ests)


def backprop_score(fld: ReconstructedField, psi0: np.ndarray, mass: float, t_star_fs: float, *,
                   snapshot_times_fs=None, dt_fs: float = 0.2, eta: float = ETA,
                   prop_dt_fs: float = 0.1) -> float:
    """Fidelity with psi0 after propagating Psi~(t*) back to zero under its own static potential.

    The potential is the snapshot-merged inversion at ``snapshot_times_fs``
    (default: t* alone), continued linearly outside its valid region.
    """
    start = fld.row(t_star_fs)
    if t_star_fs == 0:
        return fidelity(fld.grid, psi0, start)
    times = (t_star_fs,) if snapshot_times_fs is None else snapshot_times_fs
    est = candidate_potential(fld, mass, times, dt_fs, eta)
    v, _ = extend_potential(est)
    back = backward_to_zero(fld.grid, start, v, mass, t_star_fs * FS, prop_dt_fs * FS)
    return fidelity(fld.grid, psi0, back)


@dataclass
class ScoreSettings:
    centers_fs: tuple = (5.0, 35.0, 65.0)
    dt_fs: float = 0.2
    eta: float = ETA
    t_star_fs: float = 70.0
    snapshot_times_fs: tuple = (5.0, 70.0)
    prop_dt_fs: float = 0.1


class CandidateScorer:
    """Scores many sign vectors against one basis and correlation set."""

    def __init__(self, basis: EigenBasis, corr: CorrelationSet, settings: ScoreSettings = None):
        self.basis = basis
        self.corr = corr
        self.settings = settings or ScoreSettings()
        s = self.settings
        times = np.array([stencil_times(c, s.dt_fs) for c in s.centers_fs])
        rows = np.array([[row_index(corr.t_axis, t) for t in row] for row in times])
        self._stencil = corr.values[rows]  # (K, 9, G)

    def variance(self, signs: np.ndarray, chunk: int = 256) -> np.ndarray:
        """sigma^2 for a (B, G) array of sign vectors; zeros drop a component."""
        signs = np.atleast_2d(signs).astype(float)
        out = np.empty(len(signs))
        s = self.settings
        for i in range(0, len(signs), chunk):
            a = signs[i:i + chunk]
            snaps = np.einsum("ktg,bg,gn->bktn", self._stencil, a, self.basis.functions, optimize=True)
            out[i:i + chunk] = _batched_variance(self.basis.grid, snaps, self.basis.mass, s.dt_fs * FS, s.eta)
        return out

    def field(self, signs, times_fs=None) -> ReconstructedField:
        return assemble(self.basis, self.corr, signs, times_fs)

    def fidelity(self, signs) -> float:
        s = self.settings
        need = sorted({round(t, 9) for c in s.snapshot_times_fs for t in stencil_times(c, s.dt_fs)}
                      | {s.t_star_fs})
        fld = self.field(signs, need)
        return backprop_score(fld, self.basis.psi0, self.basis.mass, s.t_star_fs,
                              snapshot_times_fs=s.snapshot_times_fs, dt_fs=s.dt_fs, eta=s.eta,
                              prop_dt_fs=s.prop_dt_fs)


@dataclass
class Resolution:
    winner: SignCandidate
    field: ReconstructedField
    leaderboard: list = field(default_factory=list)


def _magnitude_order(corr: CorrelationSet) -> list[int]:
    peak = np.abs(corr.values).max(axis=0)
    rest = [g for g in np.argsort(-peak, kind="stable") if g != 0]
    return [0] + [int(g) for g in rest]


def _beam(scorer: CandidateScorer, width: int) -> list[tuple[np.ndarray, float]]:
    n = scorer.corr.count
    order = _magnitude_order(scorer.corr)
    start = np.zeros(n, dtype=int)
    start[0] = 1
    beam = [start]
    scores = scorer.variance(np.array(beam))
    for g in order[1:]:
        expanded = []
        for a in beam:
            for s in (1, -1):
                b = a.copy()
                b[g] = s
                expanded.append(b)
        expanded = np.array(expanded)
        scores = scorer.variance(expanded)
        keys = sorted(range(len(expanded)), key=lambda i: (scores[i], tuple(expanded[i])))[:width]
        beam = [expanded[i] for i in keys]
        scores = scores[keys]
    return list(zip(beam, scores))


def _exhaustive(scorer: CandidateScorer, keep: int) -> list[tuple[np.ndarray, float]]:
    n = scorer.corr.count
    best: list[tuple[np.ndarray, float]] = []
    combos = itertools.product((1, -1), repeat=n - 1)
    while True:
        block = list(itertools.islice(combos, 4096))
        if not block:
            break
        a = np.hstack([np.ones((len(block), 1), dtype=int), np.array(block, dtype=int).reshape(len(block), n - 1)])
        sc = scorer.variance(a)
        best.extend(zip(a, sc))
        best.sort(key=lambda p: (p[1], tuple(p[0])))
        del best[keep:]
    return best


def resolve(basis: EigenBasis, corr: CorrelationSet, strategy: str = "beam", width: int = 64,
            settings: ScoreSettings = None, confirm: int = 8) -> Resolution:
    """Pick the sign vector with the most time-independent inverted potential.

    ``exhaustive`` enumerates all 2^N vectors (N <= 16), ``beam`` keeps the
    ``width`` best partial assignments while deciding components in order
    of decreasing peak |c~_g|, ``greedy`` is a beam of one. The best
    ``confirm`` finalists also receive a back-propagation fidelity.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    n = corr.count
    scorer = CandidateScorer(basis, corr, settings)
    if n == 1:
        finals = [(np.ones(1, dtype=int), float(scorer.variance(np.ones((1, 1)))[0]))]
    elif strategy == "exhaustive":
        if n - 1 > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive search limited to N <= {EXHAUSTIVE_LIMIT}, got N = {n - 1}")
        finals = _exhaustive(scorer, max(width, confirm))
    else:
        finals = _beam(scorer, 1 if strategy == "greedy" else width)
    board = [SignCandidate(a, float(v)) for a, v in finals]
    board.sort(key=lambda c: c.rank_key())
    for cand in board[:confirm]:
        cand.fidelity = scorer.fidelity(cand.signs)
    board.sort(key=lambda c: c.rank_key())
    winner = board[0]
    log.info("sign search (%s): winner %s sigma2=%.3g F=%.6f", strategy, winner.label, winner.variance, winner.fidelity)
    return Resolution(winner, assemble(basis, corr, winner.signs), board)
