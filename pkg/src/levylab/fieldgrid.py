"""Periodic grid fields, spectral transforms, and function-space norms.

All computations live on the torus [0, L)^d sampled on a uniform grid with a
power-of-two number of points per axis.  Whole-space problems are emulated by
choosing L large enough that fields decay below tolerance at the boundary.

Spectral convention: numpy ``fftn``; the frequency attached to index k is
xi = 2 pi k / L with k in [-N/2, N/2) per axis (``fftfreq`` ordering).
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus [0, side_length)^dim."""

    dim: int
    points_per_axis: int
    side_length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidArgument(f"dim must be 1, 2 or 3, got {self.dim}")
        if not _is_power_of_two(self.points_per_axis):
            raise InvalidArgument("points_per_axis must be a power of two")
        if not self.side_length > 0:
            raise InvalidArgument("side_length must be positive")

    @property
    def spacing(self) -> float:
        return self.side_length / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.points_per_axis) * self.spacing

    def coordinates(self) -> np.ndarray:
        """Grid point coordinates, shape (*grid shape, dim)."""
        x = self.axis_coordinates()
        mesh = np.meshgrid(*([x] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def axis_frequencies(self) -> np.ndarray:
        """xi values per axis in fft ordering: 2 pi k / L, k in [-N/2, N/2)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    def frequencies(self) -> np.ndarray:
        """Frequency vectors, shape (*grid shape, dim), fft ordering."""
        xi = self.axis_frequencies()
        mesh = np.meshgrid(*([xi] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)


@dataclass(frozen=True)
class GridField:
    """Real m-component field sampled on a Grid.

    values has shape (components, N, ..., N) with ``dim`` spatial axes.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape == self.grid.shape:       # scalar convenience
            v = v[None, ...]
        if v.ndim != self.grid.dim + 1 or v.shape[1:] != self.grid.shape:
            raise InvalidArgument(
                f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("field values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def components(self) -> int:
        return self.values.shape[0]

    def component(self, i: int) -> np.ndarray:
        return self.values[i]

    def with_values(self, values) -> "GridField":
        return GridField(self.grid, np.asarray(values, dtype=float))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "GridField":
        """Sample fn(x) with x of shape (..., dim); fn may return (...,) for a
        scalar field or (m, ...) for a multi-component field."""
        vals = np.asarray(fn(grid.coordinates()), dtype=float)
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: Grid, components: int = 1) -> "GridField":
        return cls(grid, np.zeros((components,) + grid.shape))


@dataclass(frozen=True)
class SpaceTimeField:
    """Uniformly time-sampled trajectory of GridFields on a common grid."""

    time_step: float
    frames: tuple

    def __post_init__(self):
        if not self.time_step > 0:
            raise InvalidArgument("time_step must be positive")
        frames = tuple(self.frames)
        if not frames:
            raise InvalidArgument("at least one frame is required")
        g0, m0 = frames[0].grid, frames[0].components
        for fr in frames[1:]:
            if fr.grid != g0 or fr.components != m0:
                raise InvalidArgument("frames must share grid and components")
        object.__setattr__(self, "frames", frames)

    @property
    def grid(self) -> Grid:
        return self.frames[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.frames)) * self.time_step

    def final(self) -> GridField:
        return self.frames[-1]


# ---------------------------------------------------------------------------
# spectral transform helpers
# ---------------------------------------------------------------------------

def forward(field: GridField) -> np.ndarray:
    """fftn per component, shape (m, *grid shape), complex."""
    axes = tuple(range(1, field.grid.dim + 1))
    return np.fft.fftn(field.values, axes=axes)


def inverse(grid: Grid, coeffs: np.ndarray, imag_tol: float | None = None):
    """ifftn per component; returns the real part.

    With imag_tol set, raises ConsistencyFailure if the imaginary residue
    exceeds imag_tol relative to the field scale.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.ndim == grid.dim:
        coeffs = coeffs[None, ...]
    axes = tuple(range(1, grid.dim + 1))
    full = np.fft.ifftn(coeffs, axes=axes)
    if imag_tol is not None:
        from .errors import ConsistencyFailure
        scale = max(float(np.max(np.abs(full))), 1e-300)
        residue = float(np.max(np.abs(full.imag))) / scale
        if residue > imag_tol:
            raise ConsistencyFailure(
                f"imaginary residue {residue:.3e} exceeds {imag_tol:.1e}",
                discrepancy=residue)
    return full.real


def refine(field: GridField, factor: int = 2) -> GridField:
    """Spectral upsampling to factor*N points per axis (trigonometric
    interpolation, exact below the Nyquist mode)."""
    if factor < 1 or (factor & (factor - 1)):
        raise InvalidArgument("factor must be a power of two")
    if factor == 1:
        return field
    g = field.grid
    n, n2 = g.points_per_axis, factor * g.points_per_axis
    co = forward(field)
    for ax in range(1, g.dim + 1):
        co = np.fft.fftshift(co, axes=ax)
    pad = [(0, 0)] + [((n2 - n) // 2, (n2 - n) // 2)] * g.dim
    co = np.pad(co, pad)
    for ax in range(1, g.dim + 1):
        co = np.fft.ifftshift(co, axes=ax)
    fine = Grid(g.dim, n2, g.side_length)
    return GridField(fine, inverse(fine, co).real * factor ** g.dim)


def coarsen_samples(field: GridField, factor: int = 2) -> GridField:
    """Subsample every factor-th point per axis (inverse of refine for
    fields band-limited to the coarse grid)."""
    g = field.grid
    if g.points_per_axis % factor:
        raise InvalidArgument("factor must divide the point count")
    sl = (slice(None),) + (slice(None, None, factor),) * g.dim
    coarse = Grid(g.dim, g.points_per_axis // factor, g.side_length)
    return GridField(coarse, field.values[sl])


def gradient(field: GridField) -> np.ndarray:
    """Spectral gradient, shape (m, dim, *grid shape)."""
    g = field.grid
    co = forward(field)
    xi = g.axis_frequencies()
    out = np.empty((field.components, g.dim) + g.shape)
    axes = tuple(range(1, g.dim + 1))
    for j in range(g.dim):
        shape = [1] * (g.dim + 1)
        shape[j + 1] = g.points_per_axis
        mult = 1j * xi.reshape(shape)
        out[:, j] = np.fft.ifftn(co * mult, axes=axes).real
    return out


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def lp_norm(field: GridField, p: float) -> float:
    """Riemann-sum L^p norm; p = inf gives the max norm."""
    if p != np.inf and p < 1:
        raise InvalidArgument(f"p must be >= 1 or inf, got {p}")
    v = field.values
    if p == np.inf:
        return float(np.max(np.abs(v)))
    return float((field.grid.cell_volume * np.sum(np.abs(v) ** p)) ** (1.0 / p))


def bessel_norm(field: GridField, alpha: float, p: float) -> float:
    """|| (I - Laplace)^{alpha/2} u ||_p via the (1+|xi|^2)^{alpha/2} multiplier."""
    if alpha < 0:
        raise InvalidArgument("alpha must be nonnegative")
    if alpha == 0:
        return lp_norm(field, p)
    g = field.grid
    xi2 = np.sum(g.frequencies() ** 2, axis=-1)
    co = forward(field) * (1.0 + xi2) ** (alpha / 2.0)
    smoothed = inverse(g, co)
    return lp_norm(GridField(g, smoothed), p)


def _periodic_displacements(grid: Grid, max_dist: float):
    """Nonzero index displacements with periodic (minimum-image) distance in
    (0, max_dist]; returns (list of index tuples, array of distances)."""
    N, h, L = grid.points_per_axis, grid.spacing, grid.side_length
    k = np.arange(N)
    km = np.minimum(k, N - k) * h          # per-axis min-image distance
    mesh = np.meshgrid(*([km] * grid.dim), indexing="ij")
    dist = np.sqrt(sum(m ** 2 for m in mesh))
    idx = np.argwhere((dist > 0) & (dist <= max_dist + 1e-12 * L))
    return [tuple(i) for i in idx], dist[tuple(idx.T)]


def slobodeckij_norm(field: GridField, beta: float, p: float) -> float:
    """L^p norm plus the discrete double-integral seminorm

        ( h^{2d} sum_{x, 0<|x-y|<=L/2} |u(x)-u(y)|^p / |x-y|^{d+beta p} )^{1/p}

    with periodic minimum-image distances and the diagonal excluded."""
    if not 0.0 < beta < 1.0:
        raise InvalidArgument("beta must lie in (0,1)")
    if p < 1:
        raise InvalidArgument("p must be >= 1")
    g = field.grid
    disps, dists = _periodic_displacements(g, g.side_length / 2.0)
    acc = 0.0
    v = field.values
    for d_idx, dist in zip(disps, dists):
        shifted = np.roll(v, shift=[-i for i in d_idx],
                          axis=tuple(range(1, g.dim + 1)))
        acc += float(np.sum(np.abs(shifted - v) ** p)) / dist ** (g.dim + beta * p)
    semi = (g.cell_volume ** 2 * acc) ** (1.0 / p)
    return lp_norm(field, p) + semi


def holder_norm(field: GridField, beta: float) -> float:
    """Sup norm plus sup_{0<|x-y|<=1} |u(x)-u(y)| / |x-y|^beta."""
    if not 0.0 < beta <= 1.0:
        raise InvalidArgument("beta must lie in (0,1]")
    g = field.grid
    disps, dists = _periodic_displacements(g, min(1.0, g.side_length / 2.0))
    semi = 0.0
    v = field.values
    for d_idx, dist in zip(disps, dists):
        shifted = np.roll(v, shift=[-i for i in d_idx],
                          axis=tuple(range(1, g.dim + 1)))
        semi = max(semi, float(np.max(np.abs(shifted - v))) / dist ** beta)
    return lp_norm(field, np.inf) + semi


# ---------------------------------------------------------------------------
# serialization: flat binary and CSV (layouts documented in docs/formats.md)
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<qqdq")         # dim, N, L, m


def save_field(field: GridField, path) -> None:
    """Binary layout: little-endian header (int64 dim, int64 N, float64 L,
    int64 m) followed by m * N^dim row-major float64 values."""
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.dim, g.points_per_axis, g.side_length,
                              field.components))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field(path) -> GridField:
    with open(path, "rb") as fh:
        dim, n, length, m = _HEADER.unpack(fh.read(_HEADER.size))
        grid = Grid(dim, n, length)
        count = m * n ** dim
        vals = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    return GridField(grid, vals.reshape((m,) + grid.shape).copy())


def save_field_csv(field: GridField, path) -> None:
    """CSV layout: header row dim,N,L,m; then one row per value:
    component, index_0, ..., index_{dim-1}, value (17 significant digits)."""
    g = field.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([g.dim, g.points_per_axis, repr(g.side_length),
                    field.components])
        for c in range(field.components):
            for idx in np.ndindex(*g.shape):
                w.writerow([c, *idx, repr(float(field.values[(c,) + idx]))])


def load_field_csv(path) -> GridField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    dim, n, length, m = int(rows[0][0]), int(rows[0][1]), float(rows[0][2]), int(rows[0][3])
    grid = Grid(dim, n, length)
    vals = np.zeros((m,) + grid.shape)
    for row in rows[1:]:
        c, *idx, val = row
        vals[(int(c),) + tuple(int(i) for i in idx)] = float(val)
    return GridField(grid, vals)


def save_trajectory(stf: SpaceTimeField, path) -> None:
    """Binary layout: little-endian int64 frame count, float64 time step,
    then each frame in save_field layout."""
    g = stf.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qd", len(stf.frames), stf.time_step))
        for fr in stf.frames:
            fh.write(_HEADER.pack(g.dim, g.points_per_axis, g.side_length,
                                  fr.components))
            fh.write(np.ascontiguousarray(fr.values, dtype="<f8").tobytes())


def load_trajectory(path) -> SpaceTimeField:
    with open(path, "rb") as fh:
        n_frames, dt = struct.unpack("<qd", fh.read(16))
        frames = []
        for _ in range(n_frames):
            dim, n, length, m = _HEADER.unpack(fh.read(_HEADER.size))
            grid = Grid(dim, n, length)
            count = m * n ** dim
            vals = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
            frames.append(GridField(grid, vals.reshape((m,) + grid.shape).copy()))
    return SpaceTimeField(dt, tuple(frames))
