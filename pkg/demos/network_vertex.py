"""
Five transport equations meeting at a vertex
============================================

Three edges carry mass toward the vertex at xi = 0 and two carry it away.
We put a bump on edge 2 and watch it pass through the vertex. The vertex
rule copies edge 2 onto both outgoing edges, so the semigroup is not a
contraction: the total energy doubles.
"""

import numpy as np

from phs.control import energy_audit, simulate
from phs.fixtures import fixture
from phs.hamiltonian import check_generation
from phs.statespace import Grid, State

net = fixture("transport-network-5")

# the vertex conditions generate a contraction semigroup
report = check_generation(net.phs)
print(report.verdict, "sigma_min(U2) =", report.sigma_min_U2)

grid = Grid.uniform(0.0, 10.0, 2001)
bump = lambda xi: np.exp(-((xi - 3.0) / 1.0) ** 2)
x0 = State.from_function(grid, lambda xi: np.stack([0 * xi, bump(xi), 0 * xi, 0 * xi, 0 * xi], axis=1))

res = simulate(net.bcs, x0, None, T=6.0, dt=0.005, snapshot_count=4)

# energy per edge: edge 2 empties into the vertex, and edges 4 and 5 pick it up
for t, x in res.snapshots:
    mass = [float(np.sum(np.abs(x.values[:, k]) ** 2) * grid.nodes[1]) for k in range(5)]
    print(f"t = {t:.2f}  " + "  ".join(f"{m:.4f}" for m in mass))

audit = energy_audit(res)
print(f"total energy {res.energy_x[0]:.4f} -> {res.energy_x[-1]:.4f}")
print("energy audit:", "pass" if audit.passed else "fail", f"max residual {audit.max_residual:.2e}")
