"""Potential-energy curves: Morse, repulsive exponential and tabulated."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .grid import Grid

#: atomic mass unit in electron masses
AMU = 1822.888486
#: mass of 7Li in u
LI7_MASS_U = 7.016004
#: reduced mass of 7Li2 in electron masses (about 6394.70)
LI2_REDUCED_MASS = LI7_MASS_U * AMU / 2.0


class PotentialKind(str, Enum):
    MORSE = "morse"
    REPULSIVE_EXPONENTIAL = "repulsive_exponential"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class PotentialModel:
    """A 1-D potential curve.

    Analytic kinds use ``D`` (hartree), ``b`` (1/bohr), ``x0`` (bohr) and
    the offset ``T`` (hartree). Tabulated kinds carry sample points and
    values and are linearly interpolated between them.
    """

    kind: PotentialKind
    D: float = 0.0
    b: float = 0.0
    x0: float = 0.0
    T: float = 0.0
    table_x: np.ndarray | None = field(default=None, repr=False, compare=False)
    table_v: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind is PotentialKind.TABULATED:
            if self.table_x is None or self.table_v is None:
                raise ValueError("tabulated potential needs sample points and values")
            tx = np.asarray(self.table_x, dtype=float)
            tv = np.asarray(self.table_v, dtype=float)
            if tx.shape != tv.shape or tx.ndim != 1 or tx.size < 2:
                raise ValueError("tabulated points and values must be 1-D arrays of equal length")
            if np.any(np.diff(tx) <= 0):
                raise ValueError("tabulated points must be strictly increasing")
            if not np.all(np.isfinite(tv)):
                raise ValueError("tabulated values must be finite")
            object.__setattr__(self, "table_x", tx)
            object.__setattr__(self, "table_v", tv)
        elif self.D <= 0 or self.b <= 0:
            raise ValueError(f"{self.kind.value} potential needs D > 0 and b > 0")

    @property
    def asymptote(self) -> float:
        """Limit of V as x grows without bound (analytic kinds only)."""
        if self.kind is PotentialKind.MORSE:
            return self.D + self.T
        if self.kind is PotentialKind.REPULSIVE_EXPONENTIAL:
            return self.T
        raise ValueError("tabulated potentials have no analytic asymptote")


def morse(D: float, b: float, x0: float, T: float = 0.0) -> PotentialModel:
    return PotentialModel(PotentialKind.MORSE, D, b, x0, T)


def repulsive_exponential(D: float, b: float, x0: float, T: float = 0.0) -> PotentialModel:
    return PotentialModel(PotentialKind.REPULSIVE_EXPONENTIAL, D, b, x0, T)


def tabulated(x: np.ndarray, v: np.ndarray) -> PotentialModel:
    return PotentialModel(PotentialKind.TABULATED, table_x=x, table_v=v)


def tabulated_on_grid(grid: Grid, v: np.ndarray) -> PotentialModel:
    grid.check(v)
    return tabulated(np.array(grid.x), np.asarray(v, dtype=float))


_PRESETS = {
    # Li2 ground state X
    "X": (PotentialKind.MORSE, 0.0378492, 0.4730844, 5.0493478, 0.0),
    # Li2 first excited state A
    "A": (PotentialKind.MORSE, 0.0426108, 0.3175063, 5.8713786, 0.0640074),
    # model dissociative excited state
    "A_tilde": (PotentialKind.REPULSIVE_EXPONENTIAL, 9.11267e-5, 1.5875317, 7.3699313, 0.0640074),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> PotentialModel:
    try:
        kind, D, b, x0, T = _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown potential preset {name!r}; choose from {PRESET_NAMES}") from None
    return PotentialModel(kind, D, b, x0, T)


def eval_potential(m: PotentialModel, x):
    """Evaluate the potential at scalar or array ``x`` (bohr)."""
    x = np.asarray(x, dtype=float)
    if m.kind is PotentialKind.MORSE:
        v = m.D * (1.0 - np.exp(-m.b * (x - m.x0))) ** 2 + m.T
    elif m.kind is PotentialKind.REPULSIVE_EXPONENTIAL:
        v = m.D * np.exp(-m.b * (x - m.x0)) + m.T
    else:
        lo, hi = m.table_x[0], m.table_x[-1]
        if np.any(x < lo) or np.any(x > hi):
            raise ValueError(f"x outside tabulated range [{lo}, {hi}]")
        v = np.interp(x, m.table_x, m.table_v)
    return float(v) if v.ndim == 0 else v


def sample_on_grid(m: PotentialModel, grid: Grid) -> np.ndarray:
    return np.asarray(eval_potential(m, grid.x), dtype=float)
