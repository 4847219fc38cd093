"""Linear Cauchy-problem solvers: exact single-mode decay, agreement of
the two solver routes, stationary states, maximum principle, mollifier
properties, and the inequality probes."""

import numpy as np
import pytest

from levylab import levy
from levylab.errors import InvalidArgument
from levylab.fieldgrid import Grid, GridField, SpaceTimeField, lp_norm
from levylab.heatkernel import DriftSchedule
from levylab.linear_solver import (LinearProblem, SolverConfig,
                                   comparison_ratio, drift_solve,
                                   duhamel_solve, mollify,
                                   regularity_ratio)


def _iso1d(mass=2.0 / np.pi, alpha=1.0):
    return levy.StableSpectral(alpha,
                               levy.SphericalMeasure.isotropic(1, mass))


G = Grid(1, 256, 2 * np.pi)
X = G.coordinates()[..., 0]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_problem_validation():
    phi = GridField(G, np.sin(X)[None])
    with pytest.raises(InvalidArgument):
        LinearProblem(_iso1d(), DriftSchedule.zero(1), -1.0, None, phi, 1.0)
    with pytest.raises(InvalidArgument):
        LinearProblem(_iso1d(), DriftSchedule.zero(1), 0.0, None, phi, 0.0)
    with pytest.raises(InvalidArgument):
        SolverConfig(time_step=0.0)
    with pytest.raises(InvalidArgument):
        SolverConfig(time_step=0.1, mollifier_width=-1.0)


# ---------------------------------------------------------------------------
# exactness on simple data
# ---------------------------------------------------------------------------

def test_constants_are_stationary():
    phi = GridField(G, np.full((1, 256), 1.7))
    problem = LinearProblem(_iso1d(), DriftSchedule.zero(1), 0.0, None, phi, 0.5)
    config = SolverConfig(time_step=0.5 / 32)
    for solve in (duhamel_solve, drift_solve):
        traj = solve(problem, config)
        np.testing.assert_allclose(traj.final().values, phi.values,
                                   atol=1e-12)


def test_single_mode_exact_decay():
    # u(t) = e^{-t psi(k)} cos(kx) for psi(k) = |k|
    k = 3
    phi = GridField(G, np.cos(k * X)[None])
    T = 0.5
    problem = LinearProblem(_iso1d(), DriftSchedule.zero(1), 0.0, None, phi, T)
    traj = duhamel_solve(problem, SolverConfig(time_step=T / 64))
    np.testing.assert_allclose(traj.final().values[0],
                               np.exp(-k * T) * np.cos(k * X), atol=1e-12)


def test_damping_term_exact():
    lam = 2.5
    phi = GridField(G, np.full((1, 256), 1.0))
    T = 0.4
    problem = LinearProblem(_iso1d(), DriftSchedule.zero(1), lam, None, phi, T)
    traj = duhamel_solve(problem, SolverConfig(time_step=T / 32))
    np.testing.assert_allclose(traj.final().values,
                               np.exp(-lam * T) * phi.values, atol=1e-12)


def test_constant_drift_transports_exactly():
    # pure transport of a single mode: u(t,x) = e^{-t|k|} cos(k(x + t b))
    # for the model convention du/dt = L u + b du/dx
    b0 = 0.7
    k = 2
    T = 0.5
    phi = GridField(G, np.cos(k * X)[None])
    problem = LinearProblem(_iso1d(), DriftSchedule.constant([b0]), 0.0,
                            None, phi, T)
    traj = duhamel_solve(problem, SolverConfig(time_step=T / 64))
    np.testing.assert_allclose(traj.final().values[0],
                               np.exp(-k * T) * np.cos(k * (X + b0 * T)),
                               atol=1e-10)


def test_forced_stationary_state():
    # f = psi(k) u_star keeps u_star = cos(kx) stationary
    k = 4
    u_star = np.cos(k * X)
    phi = GridField(G, u_star[None])
    forcing = lambda t, x: float(k) * u_star
    T = 0.5
    problem = LinearProblem(_iso1d(), DriftSchedule.zero(1), 0.0, forcing, phi, T)
    traj = duhamel_solve(problem, SolverConfig(time_step=T / 128))
    np.testing.assert_allclose(traj.final().values[0], u_star, atol=1e-9)


# ---------------------------------------------------------------------------
# cross-route agreement
# ---------------------------------------------------------------------------

def test_drift_solve_matches_duhamel():
    # x-independent drift is solvable by both routes; they must agree
    rng = np.random.default_rng(11)
    coeffs = rng.normal(size=5) / np.arange(1, 6)
    phi_vals = sum(c * np.cos((j + 1) * X) for j, c in enumerate(coeffs))
    phi = GridField(G, phi_vals[None])
    forcing = lambda t, x: np.cos(t) * np.sin(2 * x[..., 0])
    T = 0.25
    problem = LinearProblem(_iso1d(), DriftSchedule.constant([0.6]), 0.3,
                            forcing, phi, T)
    config = SolverConfig(time_step=T / 256)
    a = duhamel_solve(problem, config)
    b = drift_solve(problem, config)
    diff = max(lp_norm(GridField(G, fa.values - fb.values), 2)
               for fa, fb in zip(a.frames, b.frames))
    assert diff < 1e-6


def test_maximum_principle_with_space_dependent_drift():
    rng = np.random.default_rng(4)
    phi = GridField(G, rng.normal(size=(1, 256)))
    phi = mollify(phi, 0.3)
    b = lambda t, x: (0.5 * np.sin(x[..., 0]) * np.cos(3 * t))[..., None]
    T = 0.3
    problem = LinearProblem(_iso1d(), b, 0.0, None, phi, T)
    traj = drift_solve(problem, SolverConfig(time_step=T / 64))
    sup0 = lp_norm(phi, np.inf)
    assert all(lp_norm(fr, np.inf) <= sup0 + 1e-6 for fr in traj.frames)


def test_forcing_time_step_mismatch_rejected():
    phi = GridField(G, np.sin(X)[None])
    frames = tuple(GridField(G, np.zeros((1, 256))) for _ in range(9))
    forcing = SpaceTimeField(0.1, frames)
    problem = LinearProblem(_iso1d(), DriftSchedule.zero(1), 0.0, forcing, phi, 0.8)
    with pytest.raises(InvalidArgument):
        duhamel_solve(problem, SolverConfig(time_step=0.05))


# ---------------------------------------------------------------------------
# mollifier
# ---------------------------------------------------------------------------

def test_mollify_preserves_mass_and_constants():
    rng = np.random.default_rng(2)
    u = GridField(G, rng.normal(size=(1, 256)))
    out = mollify(u, 0.4)
    assert float(np.sum(out.values)) == pytest.approx(
        float(np.sum(u.values)), rel=1e-10)
    c = GridField(G, np.full((1, 256), 3.0))
    np.testing.assert_allclose(mollify(c, 0.4).values, 3.0, atol=1e-10)


def test_mollify_zero_width_is_identity():
    u = GridField(G, np.sin(X)[None])
    assert mollify(u, 0.0) is u


def test_mollify_does_not_increase_sup():
    rng = np.random.default_rng(6)
    u = GridField(G, rng.normal(size=(1, 256)))
    assert lp_norm(mollify(u, 0.5), np.inf) <= lp_norm(u, np.inf) + 1e-10


# ---------------------------------------------------------------------------
# inequality probes
# ---------------------------------------------------------------------------

def test_regularity_ratio_single_mode_closed_form():
    # single-frequency forcing f = cos(kx) cos(om t): after burn-in the
    # response is the stationary oscillation and the ratio reduces to
    # |psi2(k)| / |psi1(k) + i om + lam|
    k, om, lam = 6, 2 * np.pi, 1.0
    nu1 = _iso1d()
    nu2 = _iso1d(mass=1.0)
    dt = 1.0 / 512
    times = np.arange(int(round(3.0 / dt)) + 1) * dt
    frames = tuple(GridField(G, (np.cos(k * X) * np.cos(om * t))[None])
                   for t in times)
    f = SpaceTimeField(dt, frames)
    got = regularity_ratio(nu1, nu2, lam, f, 2, 2, burn_in=2.0)
    psi1 = levy.symbol(nu1, np.array([float(k)]))
    psi2 = levy.symbol(nu2, np.array([float(k)]))
    expected = abs(psi2) / abs(psi1 + 1j * om + lam)
    assert got == pytest.approx(expected, rel=1e-4)


def test_regularity_ratio_rejects_zero_forcing():
    frames = tuple(GridField(G, np.zeros((1, 256))) for _ in range(5))
    f = SpaceTimeField(0.1, frames)
    with pytest.raises(InvalidArgument):
        regularity_ratio(_iso1d(), _iso1d(), 0.0, f, 2, 2)


def test_comparison_ratio_identical_operators():
    # nu2 = nu1, lam2 = lam1: ratio is exactly 1/2
    u = GridField(G, (np.cos(X) + 0.3 * np.sin(4 * X))[None])
    nu = _iso1d()
    assert comparison_ratio(nu, nu, 2.0, 2.0, u) == pytest.approx(0.5,
                                                                  rel=1e-12)


def test_comparison_ratio_single_mode_closed_form():
    k = 5
    u = GridField(G, np.cos(k * X)[None])
    nu1, nu2 = _iso1d(), _iso1d(mass=1.0)
    lam1, lam2 = 1.0, 3.0
    psi1 = levy.symbol(nu1, np.array([float(k)])).real
    psi2 = levy.symbol(nu2, np.array([float(k)])).real
    expected = (psi2 + lam2) / ((1 + lam2 / lam1) * (psi1 + lam1))
    assert comparison_ratio(nu1, nu2, lam1, lam2, u) == pytest.approx(
        expected, rel=1e-10)


def test_comparison_ratio_validation():
    u = GridField(G, np.cos(X)[None])
    with pytest.raises(InvalidArgument):
        comparison_ratio(_iso1d(), _iso1d(), 0.0, 1.0, u)
    with pytest.raises(InvalidArgument):
        comparison_ratio(_iso1d(), _iso1d(), 1.0, 1.0,
                         GridField(G, np.zeros((1, 256))))
