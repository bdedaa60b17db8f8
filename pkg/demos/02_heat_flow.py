"""
The entropy heat flow
=====================

The gradient flow of the entropy relaxes every block towards the identity,
``A_t = Id + exp(-t/2) (A_0 - Id)``. Along the way the entropy decreases at a
rate equal to the Fisher information.
"""
import numpy as np

from frs import Grid, dissipation_report, heat_flow_exact, heat_flow_integrate, make_measure

grid = Grid.uniform(3, 2)
rng = np.random.default_rng(1)
raw = np.array([np.diag(rng.uniform(0.2, 3.0, 2)) for _ in range(grid.n_cells)])
A0 = make_measure(grid, raw, normalize=True)

trace = heat_flow_integrate(A0, t_end=4.0, dt=1e-2)
exact = heat_flow_exact(A0, 4.0)
print("RK4 vs closed form:", np.abs(trace.states[-1].values - exact.values).max())

print("\n   t     entropy     fisher")
for j in range(0, len(trace), 50):
    print(f"{trace.times[j]:4.1f}  {trace.entropy_series[j]:.6f}  {trace.fisher_series[j]:.6f}")

# central differences of the entropy against minus the Fisher information
for dt in (2e-2, 1e-2, 5e-3):
    res = max(r for _, r in dissipation_report(heat_flow_integrate(A0, 4.0, dt)))
    print(f"dt = {dt:.0e}: max |dE/dt + F| = {res:.2e}")
