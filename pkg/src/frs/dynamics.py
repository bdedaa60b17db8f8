"""Heat flow of the entropy: closed form, Runge-Kutta integration and dissipation diagnostics.

The Fisher-Rao gradient flow of the entropy reduces to the linear ODE
``dA/dt = (Id - A) / 2`` on each cell. This is the same covariance equation
obeyed by Gaussian solutions of the Fokker-Planck equation with standard
Gaussian equilibrium, so no spatial PDE is solved here.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from .exceptions import DomainError, IntegrationError
from .measures import MASS_TOL, MatrixMeasure, entropy, fisher_info
from .symmat import min_eigenvalue

# classical RK4 Butcher tableau
RK4_A = np.array([[0.0, 0.0, 0.0, 0.0], [0.5, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
RK4_B = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0
RK4_C = np.array([0.0, 0.5, 0.5, 1.0])


@dataclass(frozen=True)
class FlowTrace:
    times: np.ndarray
    states: List[MatrixMeasure]
    entropy_series: np.ndarray
    fisher_series: np.ndarray

    def __len__(self):
        return len(self.states)


def heat_velocity(values):
    """Right-hand side ``(Id - A) / 2`` of the heat flow, blockwise."""
    d = values.shape[-1]
    return 0.5 * (np.eye(d) - values)


def heat_flow_exact(A0: MatrixMeasure, t: float) -> MatrixMeasure:
    """Closed-form heat flow ``A_t = Id + exp(-t/2) (A_0 - Id)``."""
    if t < 0:
        raise DomainError("flow time must be nonnegative")
    d = A0.grid.matrix_dim
    values = np.eye(d) + np.exp(-0.5 * t) * (A0.values - np.eye(d))
    return MatrixMeasure(A0.grid, values, unit_mass=A0.unit_mass)


def rk4_step(values, dt, rhs=heat_velocity):
    """One explicit Runge-Kutta step driven by the tableau constants above."""
    stages = []
    for i in range(4):
        y = values + dt * sum(RK4_A[i, j] * stages[j] for j in range(i))
        stages.append(rhs(y))
    return values + dt * sum(b * k for b, k in zip(RK4_B, stages))


def heat_flow_integrate(A0: MatrixMeasure, t_end: float, dt: float) -> FlowTrace:
    """Integrate the heat flow with classical RK4, recording every step.

    States are stored at ``t_j = j * dt`` for ``j = 0..N`` with
    ``N = round(t_end / dt)``; ``t_end`` must be a multiple of ``dt``.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if t_end < 0:
        raise DomainError("t_end must be nonnegative")
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise DomainError(f"t_end={t_end} is not a multiple of dt={dt}")
    grid = A0.grid
    values = np.array(A0.values)
    states = [A0]
    for j in range(n):
        values = rk4_step(values, dt)
        if np.any(min_eigenvalue(values) <= 0):
            raise IntegrationError(f"state left the positive cone at step {j + 1}")
        states.append(MatrixMeasure(grid, values, unit_mass=A0.unit_mass))
    if A0.unit_mass:
        drift = max(abs(s.mass - 1.0) for s in states)
        if drift > MASS_TOL:
            raise IntegrationError(f"mass drifted by {drift:.3e}")
    times = np.arange(n + 1) * dt
    ent = np.array([entropy(s).value for s in states])
    fis = np.array([fisher_info(s).value for s in states])
    return FlowTrace(times, states, ent, fis)


def dissipation_report(trace: FlowTrace):
    """Residuals ``|dE/dt + F|`` at interior times, using central differences of the entropy.

    Returns
    -------
    list of (float, float)
        ``(time, residual)`` pairs for every interior time of the trace.
    """
    t = np.asarray(trace.times)
    if t.size < 3:
        raise DomainError("dissipation report needs at least three states")
    steps = np.diff(t)
    if np.ptp(steps) > 1e-9 * steps.mean():
        raise DomainError("dissipation report needs a uniform time grid")
    dt = steps.mean()
    e = np.asarray(trace.entropy_series)
    dedt = (e[2:] - e[:-2]) / (2.0 * dt)
    res = np.abs(dedt + np.asarray(trace.fisher_series)[1:-1])
    return list(zip(t[1:-1].tolist(), res.tolist()))
