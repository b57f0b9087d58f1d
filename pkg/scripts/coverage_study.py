"""Mask span of the merged potential estimate against the amplitude threshold eta."""
import numpy as np

from carsrecon.eigensolver import ground_basis
from carsrecon.grid import FS, fs_to_au, make_grid
from carsrecon.potentials import LI2_REDUCED_MASS, preset, sample_on_grid
from carsrecon.potinv import invert_tdse, merge_snapshots
from carsrecon.propagator import PropagationSpec, evolve
from carsrecon.signs import stencil_times
from carsrecon.synth import uniform_axis

grid = make_grid(2.0, 12.0, 256)
m = LI2_REDUCED_MASS
psi0 = ground_basis(grid, preset("X"), m, 1).psi0
v = sample_on_grid(preset("A"), grid)
spec = PropagationSpec(v, m, 0.1 * FS)

t = uniform_axis(0.0, 200.0, 0.2)
psi, _ = evolve(grid, psi0, spec, fs_to_au(t), watch_edges=False)
rel = np.abs(psi) / np.abs(psi).max(axis=1, keepdims=True)
for x in (3.8, 9.4):
    i = int(np.argmin(np.abs(grid.x - x)))
    print(f"largest |Psi(x={x})|/max|Psi| for t <= 200 fs: {rel[:, i].max():.2e}")

print("eta      span (bohr)        max error (hartree)")
for eta in (0.5, 0.1, 0.01, 1e-3, 1e-4):
    ests = []
    for c in (5.0, 70.0):
        ts = stencil_times(c, 0.2)
        snaps, _ = evolve(grid, psi0, spec, fs_to_au(ts), watch_edges=False)
        ests.append(invert_tdse(grid, snaps, m, 0.2 * FS, eta, times=fs_to_au(ts)))
    est = merge_snapshots(ests)
    lo, hi = est.span()
    err = np.abs(est.values - v)[est.mask].max()
    print(f"{eta:<8g} [{lo:.2f}, {hi:.2f}]      {err:.2e}")
