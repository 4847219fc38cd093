"""Heat kernels p_t, the semigroup P_t, and the drift-shifted propagator.

All operators are Fourier multipliers on the periodic grid:

    P_t f    = F^{-1}[ e^{-t psi(xi)} F f ],
    T_{t,s}f = P_{t-s} f( . - Theta_{t,s}),   Theta_{t,s} = int_s^t theta(r) dr,

with Theta accumulated by exact piecewise-constant summation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import levy
from .errors import InvalidArgument, PreconditionFailure, ResolutionTooCoarse
from .fieldgrid import Grid, GridField, forward, inverse
from .nonlocal_op import _hermitianize

KERNEL_MASS_TOL = 1e-6
KERNEL_NEGATIVITY_TOL = 1e-6


@dataclass(frozen=True)
class DriftSchedule:
    """Piecewise-constant x-independent drift theta(t) in R^d.

    ``values[j]`` applies on [breakpoints[j], breakpoints[j+1]); the first
    (last) value extends to -inf (+inf).  ``breakpoints`` has one more entry
    than rows of ``values`` minus one, i.e. len(values) = len(breakpoints)+1.
    """

    breakpoints: tuple          # strictly increasing times, possibly empty
    values: tuple               # tuples of length d, len = len(breakpoints)+1

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(tuple(float(c) for c in np.atleast_1d(v))
                     for v in self.values)
        if len(vals) != len(bp) + 1:
            raise InvalidArgument("need len(values) == len(breakpoints) + 1")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise InvalidArgument("breakpoints must be strictly increasing")
        dims = {len(v) for v in vals}
        if len(dims) != 1:
            raise InvalidArgument("all drift values must share a dimension")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, theta0) -> "DriftSchedule":
        return cls((), (tuple(np.atleast_1d(theta0)),))

    @classmethod
    def zero(cls, dim: int) -> "DriftSchedule":
        return cls((), ((0.0,) * dim,))

    @property
    def dim(self) -> int:
        return len(self.values[0])

    @property
    def bound(self) -> float:
        return float(max(np.linalg.norm(v) for v in self.values))

    def theta(self, t: float) -> np.ndarray:
        j = int(np.searchsorted(self.breakpoints, t, side="right"))
        return np.array(self.values[j])

    def cumulative(self, s: float, t: float) -> np.ndarray:
        """Theta_{t,s} = int_s^t theta(r) dr by exact summation."""
        if t < s:
            raise InvalidArgument("need t >= s")
        edges = [s] + [b for b in self.breakpoints if s < b < t] + [t]
        total = np.zeros(self.dim)
        for a, b in zip(edges, edges[1:]):
            total += (b - a) * self.theta(a)
        return total


# ---------------------------------------------------------------------------

_kernel_cache: dict = {}


def kernel(measure, t: float, grid: Grid) -> GridField:
    """Heat kernel density p_t on the grid by spectral inversion of
    e^{-t psi}; requires a nondegenerate measure."""
    if not t > 0:
        raise InvalidArgument("t must be positive")
    if levy.nondegeneracy_of(measure) <= 0.0:
        raise PreconditionFailure("degenerate measure: heat kernel undefined")
    key = (levy.measure_digest(measure), float(t), grid)
    hit = _kernel_cache.get(key)
    if hit is not None:
        return hit
    psi = levy.symbol_array(measure, grid.frequencies())
    # density of the process at time t: characteristic function e^{-t psi},
    # inverted with the e^{+i xi x} convention via conj so that the forward
    # (Fokker-Planck) equation  d/dt p = L^{nu*} p  holds for asymmetric
    # measures as well
    mult = _hermitianize(np.exp(-t * np.conj(psi)))
    dens = inverse(grid, mult) / grid.cell_volume
    mass = float(np.sum(dens) * grid.cell_volume)
    if abs(mass - 1.0) > KERNEL_MASS_TOL:
        raise ResolutionTooCoarse(
            f"kernel mass {mass:.8f} deviates from 1",
            suggested_points=2 * grid.points_per_axis,
            suggested_length=2.0 * grid.side_length)
    if float(dens.min()) < -KERNEL_NEGATIVITY_TOL:
        raise ResolutionTooCoarse(
            f"kernel minimum {dens.min():.3e} below -{KERNEL_NEGATIVITY_TOL:.0e}",
            suggested_points=2 * grid.points_per_axis,
            suggested_length=grid.side_length)
    out = GridField(grid, dens)
    _kernel_cache[key] = out
    return out


def semigroup_apply(measure, t: float, field: GridField) -> GridField:
    """P_t f via the e^{-t psi} multiplier; t = 0 is the identity."""
    if t < 0:
        raise InvalidArgument("t must be nonnegative")
    if t == 0:
        return field
    g = field.grid
    psi = levy.symbol_array(measure, g.frequencies())
    mult = _hermitianize(np.exp(-t * psi))
    return GridField(g, inverse(g, forward(field) * mult))


def shifted_propagator(measure, drift: DriftSchedule, t: float, s: float,
                       field: GridField) -> GridField:
    """T_{t,s} f(x) = P_{t-s} f(x - Theta_{t,s})."""
    if t < s:
        raise InvalidArgument("need t >= s")
    g = field.grid
    if drift.dim != g.dim:
        raise InvalidArgument("drift and field dimensions differ")
    theta_cum = drift.cumulative(s, t)
    psi = levy.symbol_array(measure, g.frequencies())
    phase = g.frequencies() @ theta_cum
    mult = _hermitianize(np.exp(-(t - s) * psi - 1j * phase))
    return GridField(g, inverse(g, forward(field) * mult))
