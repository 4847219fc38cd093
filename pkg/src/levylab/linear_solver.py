"""Linear nonlocal parabolic solvers and regularity-inequality probes.

The model equation on the torus is

    d/dt u = L^nu u + b . grad u - lambda u + f,      u(0) = phi.

Two solvers:

* ``duhamel_solve`` -- x-independent drift; every Fourier mode obeys the
  scalar ODE  u' = -(psi(xi) - i xi.theta(t) + lambda) u + f  and is stepped
  with a second-order exponential integrator that is exact for forcing that
  is linear in time within each step.
* ``drift_solve`` -- x-dependent drift; fixed-point time stepping of the
  integral equation  u(t) = P_t phi + int_0^t P_{t-s} (b.grad u + f)(s) ds
  with trapezoidal treatment of the drift term and optional mollification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import levy
from .errors import InvalidArgument, IterationFailure
from .fieldgrid import (Grid, GridField, SpaceTimeField, forward, inverse,
                        lp_norm)
from .nonlocal_op import _hermitianize, apply as op_apply
from .heatkernel import DriftSchedule


@dataclass(frozen=True)
class LinearProblem:
    """Linear Cauchy problem data.

    ``drift`` is a DriftSchedule (x-independent), a callable ``b(t, x)``
    mapping coordinates of shape (*grid, d) to a vector field of the same
    shape, or a SpaceTimeField with d components on the solver time grid.
    ``forcing`` is a SpaceTimeField or a callable ``f(t, x)``.
    """

    measure: object
    drift: object
    lam: float
    forcing: object
    phi: GridField
    horizon: float

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidArgument("lambda must be nonnegative")
        if not self.horizon > 0:
            raise InvalidArgument("horizon must be positive")


@dataclass(frozen=True)
class SolverConfig:
    time_step: float
    mollifier_width: float = 0.0
    picard_tol: float = 1e-10
    max_iterations: int = 50

    def __post_init__(self):
        if not self.time_step > 0:
            raise InvalidArgument("time_step must be positive")
        if self.mollifier_width < 0:
            raise InvalidArgument("mollifier width must be nonnegative")
        if not self.picard_tol > 0 or self.max_iterations < 1:
            raise InvalidArgument("tolerances must be positive")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def mollify(field: GridField, eps: float) -> GridField:
    """Convolution with the compactly supported bump mollifier rho_eps
    (unit discrete mass, support radius eps), computed spectrally."""
    if eps <= 0:
        return field
    g = field.grid
    x = g.coordinates()
    half = g.side_length / 2.0
    centered = np.where(x > half, x - g.side_length, x)
    r2 = np.sum(centered ** 2, axis=-1) / eps ** 2
    with np.errstate(divide="ignore", over="ignore"):
        rho = np.where(r2 < 1.0, np.exp(-1.0 / np.maximum(1e-300, 1.0 - r2)), 0.0)
    total = float(rho.sum()) * g.cell_volume
    if total <= 0:
        raise InvalidArgument("mollifier width below grid resolution")
    rho /= total
    rho_hat = np.fft.fftn(rho)
    out = inverse(g, forward(field) * rho_hat) * g.cell_volume
    return GridField(g, out)


def _phi1(z):
    """(1 - e^{-z}) / z, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    out = -np.expm1(-zs) / zs
    return np.where(small, 1.0 - z / 2.0 + z * z / 6.0, out)


def _phi2(z):
    """(e^{-z} - 1 + z) / z^2, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    out = (np.expm1(-zs) + zs) / (zs * zs)
    return np.where(small, 0.5 - z / 6.0 + z * z / 24.0, out)


def _forcing_frames(forcing, grid: Grid, times, components: int):
    if isinstance(forcing, SpaceTimeField):
        if len(forcing.frames) < len(times):
            raise InvalidArgument("forcing has fewer frames than time steps")
        if len(times) > 1 and abs(forcing.time_step - (times[1] - times[0])) > 1e-12:
            raise InvalidArgument("forcing time step must match solver time step")
        return [forcing.frames[i].values for i in range(len(times))]
    if forcing is None:
        z = np.zeros((components,) + grid.shape)
        return [z] * len(times)
    x = grid.coordinates()
    out = []
    for t in times:
        v = np.asarray(forcing(t, x), dtype=float)
        if v.shape == grid.shape:
            v = v[None]
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# Duhamel solver (x-independent drift)
# ---------------------------------------------------------------------------

def duhamel_solve(problem: LinearProblem, config: SolverConfig) -> SpaceTimeField:
    """Exponential-integrator solution for DriftSchedule drifts.

    Exact in space (diagonal in frequency) and second order in time
    (exact when the forcing is piecewise linear between frames)."""
    if not isinstance(problem.drift, DriftSchedule):
        raise InvalidArgument("duhamel_solve needs an x-independent drift")
    g = problem.phi.grid
    dt = config.time_step
    n_steps = int(round(problem.horizon / dt))
    times = np.arange(n_steps + 1) * dt
    m = problem.phi.components
    f_frames = _forcing_frames(problem.forcing, g, times, m)

    psi = levy.symbol_array(problem.measure, g.frequencies())
    xi = g.frequencies()
    axes = tuple(range(1, g.dim + 1))

    u_hat = np.fft.fftn(problem.phi.values, axes=axes)
    frames = [problem.phi]
    f_hat_next = np.fft.fftn(f_frames[0], axes=axes)
    for n in range(n_steps):
        theta = problem.drift.theta(times[n] + dt / 2.0)
        a = psi - 1j * (xi @ theta) + problem.lam
        z = a * dt
        decay = np.exp(-z)
        f_hat = f_hat_next
        f_hat_next = np.fft.fftn(f_frames[n + 1], axes=axes)
        u_hat = (decay * u_hat
                 + dt * (_phi1(z) - _phi2(z)) * f_hat
                 + dt * _phi2(z) * f_hat_next)
        vals = np.fft.ifftn(u_hat, axes=axes).real
        frames.append(GridField(g, vals))
    return SpaceTimeField(dt, tuple(frames))


# ---------------------------------------------------------------------------
# variable-drift solver
# ---------------------------------------------------------------------------

def _drift_frames(drift, grid: Grid, times):
    """Drift vector values (*grid shape, d) per time frame."""
    if isinstance(drift, DriftSchedule):
        return [np.broadcast_to(drift.theta(t), grid.shape + (grid.dim,))
                for t in times]
    if isinstance(drift, SpaceTimeField):
        if len(drift.frames) < len(times):
            raise InvalidArgument("drift has fewer frames than time steps")
        return [np.moveaxis(drift.frames[i].values, 0, -1)
                for i in range(len(times))]
    x = grid.coordinates()
    out = []
    for t in times:
        v = np.asarray(drift(t, x), dtype=float)
        if v.shape != grid.shape + (grid.dim,):
            raise InvalidArgument("drift callable must return shape (*grid, d)")
        if not np.all(np.isfinite(v)):
            from .errors import DriftEvaluationFailure
            raise DriftEvaluationFailure("non-finite drift value", t=t)
        out.append(v)
    return out


def _grad_dot(b_vals, u_hat, xi, axes):
    """(b . grad u) for every component of u_hat; returns physical values."""
    m = u_hat.shape[0]
    out = np.empty((m,) + b_vals.shape[:-1])
    for j in range(b_vals.shape[-1]):
        du = np.fft.ifftn(u_hat * (1j * xi[..., j]), axes=axes).real
        if j == 0:
            out = du * b_vals[..., j]
        else:
            out += du * b_vals[..., j]
    return out


def drift_solve(problem: LinearProblem, config: SolverConfig,
                dealias: bool = False) -> SpaceTimeField:
    """Fixed-point time stepping of the integral equation with x-dependent
    drift; within each step the drift term is treated trapezoidally and
    iterated until the new frame moves less than picard_tol in L^2."""
    g = problem.phi.grid
    dt = config.time_step
    eps = config.mollifier_width
    n_steps = int(round(problem.horizon / dt))
    times = np.arange(n_steps + 1) * dt

    phi = mollify(problem.phi, eps)
    m = phi.components
    f_frames = _forcing_frames(problem.forcing, g, times, m)
    if eps > 0:
        f_frames = [mollify(GridField(g, v), eps).values for v in f_frames]
    b_frames = _drift_frames(problem.drift, g, times)
    if eps > 0:
        b_frames = [np.moveaxis(
            mollify(GridField(g, np.moveaxis(v, -1, 0)), eps).values, 0, -1)
            for v in b_frames]

    psi = levy.symbol_array(problem.measure, g.frequencies())
    z = dt * (psi + problem.lam)
    prop = _hermitianize(np.exp(-z))
    w_old = _hermitianize(dt * (_phi1(z) - _phi2(z)))   # weight on g_n
    w_new = _hermitianize(dt * _phi2(z))                # weight on g_{n+1}
    w_pred = _hermitianize(dt * _phi1(z))
    xi = g.frequencies()
    axes = tuple(range(1, g.dim + 1))
    mask = _dealias_mask(g) if dealias else None

    u = phi.values
    u_hat = np.fft.fftn(u, axes=axes)
    frames = [phi]
    vol = g.cell_volume
    for n in range(n_steps):
        g_n = _grad_dot(b_frames[n], u_hat, xi, axes) + f_frames[n]
        g_n_hat = np.fft.fftn(g_n, axes=axes)
        if mask is not None:
            g_n_hat *= mask
        new_hat = prop * u_hat + w_pred * g_n_hat  # predictor
        converged = False
        residuals = []
        for _ in range(config.max_iterations):
            g_new = _grad_dot(b_frames[n + 1], new_hat, xi, axes) + f_frames[n + 1]
            g_new_hat = np.fft.fftn(g_new, axes=axes)
            if mask is not None:
                g_new_hat *= mask
            cand_hat = prop * u_hat + w_old * g_n_hat + w_new * g_new_hat
            delta = cand_hat - new_hat
            res = math.sqrt(float(np.sum(np.abs(delta) ** 2)) * vol
                            / delta[0].size)
            residuals.append(res)
            new_hat = cand_hat
            if res < config.picard_tol:
                converged = True
                break
        if not converged:
            raise IterationFailure(
                f"drift step {n} did not contract to {config.picard_tol:.1e}",
                residuals=residuals)
        u_hat = new_hat
        frames.append(GridField(g, np.fft.ifftn(u_hat, axes=axes).real))
    return SpaceTimeField(dt, tuple(frames))


def _dealias_mask(grid: Grid):
    """2/3-rule mask for quadratic nonlinearities."""
    k = np.fft.fftfreq(grid.points_per_axis) * grid.points_per_axis
    cut = grid.points_per_axis / 3.0
    keep = np.abs(k) <= cut
    mask = keep
    for _ in range(grid.dim - 1):
        mask = np.multiply.outer(mask, keep)
    return mask.astype(float)


# ---------------------------------------------------------------------------
# inequality probes
# ---------------------------------------------------------------------------

def regularity_ratio(nu1, nu2, lam: float, f: SpaceTimeField,
                     p: float, q: float,
                     burn_in: float = 0.0) -> float:
    """LHS^{1/q} / RHS^{1/q} of the maximal-regularity estimate

        int || L^{nu2} u(t) ||_p^q dt <= C int || f(t) ||_p^q dt

    where u is the Duhamel solution driven by nu1 with forcing f and zero
    initial data.  Frames with t < burn_in are excluded from both sides."""
    if all(float(np.max(np.abs(fr.values))) == 0.0 for fr in f.frames):
        raise InvalidArgument("zero forcing: ratio undefined")
    if levy.nondegeneracy_of(nu1) <= 0:
        raise InvalidArgument("nu1 must be nondegenerate")
    g = f.grid
    problem = LinearProblem(nu1, DriftSchedule.zero(g.dim), lam, f,
                            GridField.zeros(g, f.frames[0].components),
                            horizon=f.time_step * (len(f.frames) - 1))
    u = duhamel_solve(problem, SolverConfig(time_step=f.time_step))
    dt = f.time_step
    keep = [i for i, t in enumerate(u.times) if t >= burn_in]
    lhs = rhs = 0.0
    for j, i in enumerate(keep):
        w = 0.5 * dt if j in (0, len(keep) - 1) else dt   # trapezoid in time
        lhs += lp_norm(op_apply(nu2, u.frames[i]), p) ** q * w
        rhs += lp_norm(f.frames[i], p) ** q * w
    return (lhs / rhs) ** (1.0 / q)


def comparison_ratio(nu1, nu2, lam1: float, lam2: float, u: GridField,
                     p: float = 2.0) -> float:
    """|| (L^{nu2} - lam2) u ||_p / ((1 + lam2/lam1) || (L^{nu1} - lam1) u ||_p)."""
    if lam1 <= 0 or lam2 <= 0:
        raise InvalidArgument("lambdas must be positive")
    if float(np.max(np.abs(u.values))) == 0.0:
        raise InvalidArgument("u is identically zero")
    num = lp_norm(GridField(u.grid, op_apply(nu2, u).values - lam2 * u.values), p)
    den = lp_norm(GridField(u.grid, op_apply(nu1, u).values - lam1 * u.values), p)
    return num / ((1.0 + lam2 / lam1) * den)
