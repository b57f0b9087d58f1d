"""Run configuration stored as flat ``key = value`` text."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .potentials import LI2_REDUCED_MASS

SYNTH_MODES = ("direct", "closure")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


@dataclass
class RunConfig:
    system: str = "li2"
    grid_xmin: float = 2.0
    grid_xmax: float = 12.0
    grid_n: int = 256
    mass: float = LI2_REDUCED_MASS
    ground: str = "X"
    excited: str = "A"
    mu: float = 2.0
    eps1: float = 1e-4
    eps2: float = 1e-4
    eps3: float = 1e-4
    basis_count: int = 25
    t_min_fs: float = 0.0
    t_max_fs: float = 80.0
    t_step_fs: float = 0.2
    tau_min_fs: float = 3.0
    tau_max_fs: float = 1500.0
    tau_step_fs: float = 1.0
    prop_dt_fs: float = 0.1
    synth_mode: str = "direct"
    closure_count: int = 0  # 0: the inversion basis size
    strategy: str = "beam"
    width: int = 64
    eta: float = 0.01
    fd_dt_fs: float = 0.2
    snapshot_times_fs: tuple = (5.0, 70.0)
    score_centers_fs: tuple = (5.0, 35.0, 65.0)
    t_star_fs: float = 70.0
    report_times_fs: tuple = (5.0, 25.0, 50.0)
    out_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("t_step_fs", "tau_step_fs", "prop_dt_fs", "fd_dt_fs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t_max_fs < self.t_min_fs or self.tau_max_fs <= self.tau_min_fs:
            raise ValueError("lattice max must not lie below lattice min")
        if self.basis_count < 1:
            raise ValueError("basis.count must be at least 1")
        if self.closure_count and self.closure_count < self.basis_count:
            raise ValueError("synth.closure_count cannot be smaller than basis.count")
        if self.grid_n > 0 and self.basis_count > self.grid_n:
            raise ValueError("basis.count exceeds the number of grid points")
        if self.synth_mode not in SYNTH_MODES:
            raise ValueError(f"synth.mode must be one of {SYNTH_MODES}")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("potinv.eta must lie in (0, 1)")


# file key -> (attribute, parser)
KEYS = {
    "system": ("system", str),
    "grid.xmin": ("grid_xmin", float),
    "grid.xmax": ("grid_xmax", float),
    "grid.n": ("grid_n", int),
    "mass": ("mass", float),
    "potential.ground": ("ground", str),
    "potential.excited": ("excited", str),
    "pulses.mu": ("mu", float),
    "pulses.eps1": ("eps1", float),
    "pulses.eps2": ("eps2", float),
    "pulses.eps3": ("eps3", float),
    "basis.count": ("basis_count", int),
    "lattice.t.min_fs": ("t_min_fs", float),
    "lattice.t.max_fs": ("t_max_fs", float),
    "lattice.t.step_fs": ("t_step_fs", float),
    "lattice.tau32.min_fs": ("tau_min_fs", float),
    "lattice.tau32.max_fs": ("tau_max_fs", float),
    "lattice.tau32.step_fs": ("tau_step_fs", float),
    "propagation.dt_fs": ("prop_dt_fs", float),
    "synth.mode": ("synth_mode", str),
    "synth.closure_count": ("closure_count", int),
    "search.strategy": ("strategy", str),
    "search.width": ("width", int),
    "potinv.eta": ("eta", float),
    "potinv.dt_fs": ("fd_dt_fs", float),
    "snapshots.times_fs": ("snapshot_times_fs", _floats),
    "score.centers_fs": ("score_centers_fs", _floats),
    "backprop.t_star_fs": ("t_star_fs", float),
    "report.times_fs": ("report_times_fs", _floats),
    "output.dir": ("out_dir", str),
}
_ATTR_TO_KEY = {attr: key for key, (attr, _) in KEYS.items()}


def parse_config(text: str, **overrides) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        attr, conv = KEYS[key]
        try:
            values[attr] = conv(val)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path, **overrides) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), **overrides)


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(f"{x:g}" for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{_ATTR_TO_KEY[f.name]} = {v}")
    return "\n".join(lines) + "\n"


def desk_config(system: str = "li2", **kw) -> RunConfig:
    """CI-sized run: t up to 80 fs, tau32 up to 1500 fs."""
    if system == "li2":
        base = dict(system="li2", excited="A", basis_count=25)
    elif system == "dli2":
        base = dict(system="dli2", excited="A_tilde", basis_count=40, eta=0.1,
                    snapshot_times_fs=(5.0, 79.0), score_centers_fs=(5.0, 40.0, 75.0), t_star_fs=79.0,
                    report_times_fs=(5.0, 40.0, 79.0))
    else:
        raise ValueError(f"unknown system {system!r}")
    base.update(kw)
    return RunConfig(**base)


def full_config(system: str = "li2", **kw) -> RunConfig:
    """Full lattice: tau32 from 3 to 6000 fs, t to 200 fs (Li2) or 80 fs (d-Li2)."""
    t_max = 200.0 if system == "li2" else 80.0
    return desk_config(system, t_max_fs=t_max, tau_max_fs=6000.0, **kw)
