"""
Schrodinger problem as the temperature goes to zero
===================================================

Adding ``eps^2`` times the time-integrated Fisher information to the kinetic
action gives the Schrodinger problem. As ``eps`` decreases its value falls
back towards the squared geodesic distance.
"""
import numpy as np

from frs import Grid, SolverConfig, gamma_sweep, solve_geodesic
from frs.checks import random_measure

rng = np.random.default_rng(42)
grid = Grid.uniform(4, 2)
A0, A1 = random_measure(rng, grid), random_measure(rng, grid)
cfg = SolverConfig(n_steps=32)

geo = solve_geodesic(A0, A1, cfg)
print(f"geodesic value {geo.value:.6f}")
print("   eps      value        gap     gap/eps^2")
for row in gamma_sweep(A0, A1, [0.5, 0.2, 0.1, 0.05, 0.02], cfg):
    print(f"{row.epsilon:5.2f}  {row.value:.6f}  {row.gap:.3e}  {row.gap / row.epsilon**2:.4f}")
