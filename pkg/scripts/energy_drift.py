"""Energy drift of the split-operator propagator against step size (2000-step horizon at 0.1 fs)."""
import numpy as np

from carsrecon.eigensolver import ground_basis
from carsrecon.grid import FS, make_grid
from carsrecon.potentials import LI2_REDUCED_MASS, preset, sample_on_grid
from carsrecon.propagator import PropagationSpec, SplitOperator, energy

grid = make_grid(2.0, 12.0, 256)
psi0 = ground_basis(grid, preset("X"), LI2_REDUCED_MASS, 1).psi0.astype(complex)
v = sample_on_grid(preset("A"), grid)
horizon = 200.0
print("dt_fs   max_rel    end_rel    trend*T")
for dt in (0.2, 0.1, 0.05, 0.025):
    op = SplitOperator(grid, PropagationSpec(v, LI2_REDUCED_MASS, dt * FS))
    psi = psi0.copy()
    e0 = energy(grid, psi, v, LI2_REDUCED_MASS)
    dev = []
    for _ in range(int(round(horizon / dt))):
        psi = op.step(psi)
        dev.append((energy(grid, psi, v, LI2_REDUCED_MASS) - e0) / abs(e0))
    dev = np.array(dev)
    t = dt * np.arange(1, len(dev) + 1)
    slope = np.polyfit(t, dev, 1)[0]
    print(f"{dt:<7g} {np.abs(dev).max():.3e}  {abs(dev[-1]):.3e}  {abs(slope) * horizon:.3e}")
