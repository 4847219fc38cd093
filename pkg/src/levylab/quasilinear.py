"""Quasi-linear critical solvers: Picard iteration with frozen coefficients,
multidimensional critical Burgers, and the Hamilton-Jacobi reduction.

Model system (m components, shared scalar generator L and shared drift):

    d/dt u = L u + b(t, x, u) . grad u + f(t, x, u),     u(0) = phi,

solved by freezing b and f along the previous iterate and calling
``linear_solver.drift_solve`` (u_0 identically 0).

Critical Burgers  d/dt u + (-Delta)^{1/2} u + u . grad u = 0  is the case
b(t,x,u) = -u, f = 0 (the minus sign moves u . grad u to the right side).

The Hamilton-Jacobi equation  d/dt u + (-Delta)^{1/2} u + H(t,x,u,grad u) = 0
is solved through the augmented field w = (u, q) with q = grad u.  Writing
H = grad_q H . q + (H - grad_q H . q) gives one shared drift for all
components, b = -grad_q H, with forcing

    f_u   = -(H - grad_q H . q),
    f_{q_i} = -(d_{x_i} H + d_u H q_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import levy
from .errors import (GradientAugmentationInconsistency, InvalidArgument,
                     IterationFailure)
from .fieldgrid import (Grid, GridField, SpaceTimeField, forward, gradient,
                        lp_norm)
from .heatkernel import DriftSchedule
from .linear_solver import LinearProblem, SolverConfig, drift_solve

GRADIENT_CONSISTENCY_TOL = 1e-3


@dataclass(frozen=True)
class QuasilinearProblem:
    """Quasi-linear problem data.  ``drift_b(t, x, u)`` maps coordinates
    (*grid, d) and state (m, *grid) to a vector field (d, *grid);
    ``forcing_f(t, x, u)`` returns (m, *grid).  The declared growth bound
    |f(t,x,u)| <= growth_constant |u| + growth_offset(x) is spot-checked."""

    measure: object
    components: int
    drift_b: object             # callable or None
    forcing_f: object           # callable or None
    phi: GridField
    horizon: float
    growth_constant: object = None   # None: no declared bound, no check
    growth_offset: object = None     # callable x -> (*grid,) or None

    def __post_init__(self):
        if getattr(self.measure, "alpha", None) != 1.0:
            raise InvalidArgument("quasi-linear solver requires alpha = 1")
        if not 0.0 < self.horizon <= 1.0:
            raise InvalidArgument("horizon must lie in (0, 1]")
        if self.phi.components != self.components:
            raise InvalidArgument("phi component count mismatch")
        self._spot_check_growth()

    def _spot_check_growth(self):
        if self.forcing_f is None or self.growth_constant is None:
            return
        g = self.phi.grid
        x = g.coordinates()
        offset = (np.zeros(g.shape) if self.growth_offset is None
                  else np.asarray(self.growth_offset(x), dtype=float))
        rng = np.random.default_rng(0)
        for t in (0.0, 0.5 * self.horizon, self.horizon):
            u = self.phi.values * rng.uniform(-1.5, 1.5)
            fv = np.asarray(self.forcing_f(t, x, u), dtype=float)
            lhs = np.sqrt(np.sum(fv ** 2, axis=0))
            rhs = (self.growth_constant * np.sqrt(np.sum(u ** 2, axis=0))
                   + offset)
            if np.any(lhs > rhs + 1e-9):
                raise InvalidArgument(
                    "declared growth bound |f| <= C|u| + h(x) fails at "
                    f"t={t}")


def _freeze(problem: QuasilinearProblem, traj: SpaceTimeField,
            times) -> tuple:
    """Drift and forcing SpaceTimeFields along a frozen iterate."""
    g = problem.phi.grid
    x = g.coordinates()
    b_frames = []
    f_frames = []
    for j, t in enumerate(times):
        u = traj.frames[j].values
        if problem.drift_b is None:
            b_frames.append(GridField.zeros(g, g.dim))
        else:
            b_frames.append(GridField(
                g, np.asarray(problem.drift_b(float(t), x, u), dtype=float)))
        if problem.forcing_f is None:
            f_frames.append(GridField.zeros(g, problem.components))
        else:
            f_frames.append(GridField(
                g, np.asarray(problem.forcing_f(float(t), x, u), dtype=float)))
    dt = float(times[1] - times[0])
    return (SpaceTimeField(dt, tuple(b_frames)),
            SpaceTimeField(dt, tuple(f_frames)))


def picard_solve(problem: QuasilinearProblem, config: SolverConfig,
                 dealias: bool = False) -> SpaceTimeField:
    """Freeze coefficients along the previous iterate, solve the linear
    problem, repeat until successive trajectories are sup_t-L^2 close;
    the first iterate starts from the zero trajectory."""
    if levy.nondegeneracy_of(problem.measure) <= 0:
        raise InvalidArgument("measure must be nondegenerate")
    g = problem.phi.grid
    dt = config.time_step
    n_steps = int(round(problem.horizon / dt))
    times = np.arange(n_steps + 1) * dt
    zero = GridField.zeros(g, problem.components)
    current = SpaceTimeField(dt, tuple(zero for _ in times))
    residuals = []
    for _ in range(config.max_iterations):
        b_st, f_st = _freeze(problem, current, times)
        lp = LinearProblem(problem.measure, b_st, 0.0, f_st, problem.phi,
                           problem.horizon)
        new = drift_solve(lp, config, dealias=dealias)
        res = max(lp_norm(GridField(g, a.values - b.values), 2)
                  for a, b in zip(new.frames, current.frames))
        residuals.append(res)
        current = new
        if res < config.picard_tol:
            return current
    raise IterationFailure("Picard iteration did not converge",
                           residuals=residuals)


def burgers_solve(phi: GridField, measure, horizon: float,
                  config: SolverConfig) -> SpaceTimeField:
    """Critical Burgers: d components advected by their own negative value,
    pseudo-spectral with 2/3-rule dealiasing."""
    d = phi.grid.dim
    if phi.components != d:
        raise InvalidArgument("Burgers needs d components on a d-dim grid")
    problem = QuasilinearProblem(
        measure, d, drift_b=lambda t, x, u: -u, forcing_f=None,
        phi=phi, horizon=horizon)
    return picard_solve(problem, config, dealias=True)


# ---------------------------------------------------------------------------
# Hamilton-Jacobi
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hamiltonian:
    """H(t, x, u, q) with its partial derivatives; u has shape (*grid,),
    q has shape (d, *grid); value shape (*grid,), dq shape (d, *grid)."""

    name: str
    value: object
    dx: object      # gradient in x, shape (d, *grid)
    du: object      # scalar partial, shape (*grid,)
    dq: object      # gradient in q, shape (d, *grid)


def _quadratic() -> Hamiltonian:
    return Hamiltonian(
        "quadratic",
        value=lambda t, x, u, q: 0.5 * np.sum(q ** 2, axis=0),
        dx=lambda t, x, u, q: np.zeros_like(q),
        du=lambda t, x, u, q: np.zeros_like(u),
        dq=lambda t, x, u, q: q)


def _anisotropic_quadratic(weights=(1.0, 0.25, 2.0)) -> Hamiltonian:
    w = np.asarray(weights, dtype=float)

    def _w(q):
        return w[:q.shape[0]].reshape((-1,) + (1,) * (q.ndim - 1))

    return Hamiltonian(
        "anisotropic-quadratic",
        value=lambda t, x, u, q: 0.5 * np.sum(_w(q) * q ** 2, axis=0),
        dx=lambda t, x, u, q: np.zeros_like(q),
        du=lambda t, x, u, q: np.zeros_like(u),
        dq=lambda t, x, u, q: _w(q) * q)


def _smooth_bounded() -> Hamiltonian:
    return Hamiltonian(
        "smooth-bounded",
        value=lambda t, x, u, q: np.sqrt(1.0 + np.sum(q ** 2, axis=0)) - 1.0,
        dx=lambda t, x, u, q: np.zeros_like(q),
        du=lambda t, x, u, q: np.zeros_like(u),
        dq=lambda t, x, u, q: q / np.sqrt(1.0 + np.sum(q ** 2, axis=0)))


HAMILTONIANS = {
    "quadratic": _quadratic,
    "anisotropic-quadratic": _anisotropic_quadratic,
    "smooth-bounded": _smooth_bounded,
}


def hamilton_jacobi_solve(H: Hamiltonian, phi: GridField, measure,
                          horizon: float, config: SolverConfig,
                          return_augmented: bool = False) -> SpaceTimeField:
    """Solve d/dt u + (-Delta_psi) u + H(t, x, u, grad u) = 0 through the
    augmented (u, grad u) system; returns the scalar trajectory (or the
    full augmented one) after checking grad u against the q components."""
    if phi.components != 1:
        raise InvalidArgument("phi must be scalar")
    g = phi.grid
    q0 = gradient(phi)[0]                      # (d, *grid)
    w0 = GridField(g, np.concatenate([phi.values, q0], axis=0))

    def split(wv):
        return wv[0], wv[1:]

    def drift_b(t, x, wv):
        u, q = split(wv)
        return -np.asarray(H.dq(t, x, u, q), dtype=float)

    def forcing_f(t, x, wv):
        u, q = split(wv)
        hv = np.asarray(H.value(t, x, u, q), dtype=float)
        dq = np.asarray(H.dq(t, x, u, q), dtype=float)
        dx = np.asarray(H.dx(t, x, u, q), dtype=float)
        du = np.asarray(H.du(t, x, u, q), dtype=float)
        f_u = -(hv - np.sum(dq * q, axis=0))
        f_q = -(dx + du[None] * q)
        return np.concatenate([f_u[None], f_q], axis=0)

    problem = QuasilinearProblem(measure, 1 + g.dim, drift_b, forcing_f,
                                 w0, horizon)
    traj = picard_solve(problem, config, dealias=True)

    final = traj.frames[-1]
    u_final = GridField(g, final.values[:1])
    grad_u = gradient(u_final)[0]
    defect = math.sqrt(float(np.sum((grad_u - final.values[1:]) ** 2))
                       * g.cell_volume)
    if defect >= GRADIENT_CONSISTENCY_TOL:
        raise GradientAugmentationInconsistency(
            f"|grad u - q|_2 = {defect:.3e} at final time")
    if return_augmented:
        return traj
    scalar = tuple(GridField(g, fr.values[:1]) for fr in traj.frames)
    return SpaceTimeField(traj.time_step, scalar)
