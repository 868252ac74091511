"""Uniform tensor grids on a truncated box with Dirichlet convention.

Fields live on [-L, L]^N (N = 1 or 2) sampled at n points per axis and are
treated as zero outside the box (homogeneous Dirichlet ghost values).  The
module provides the second-order Laplacian stencil, rectangle-rule
quadrature, centered-difference H1 pairings, and a text dump format that
round-trips bit exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L]^dim with spacing h = 2L/(n-1)."""

    dim: int
    half_extent: float
    points_per_axis: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not math.isfinite(self.half_extent) or self.half_extent <= 0:
            raise ValueError(f"half_extent must be finite and positive, got {self.half_extent}")
        if self.points_per_axis < 16:
            raise ValueError(f"points_per_axis must be >= 16, got {self.points_per_axis}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / (self.points_per_axis - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def num_nodes(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis(self) -> NDArray:
        ax = np.linspace(-self.half_extent, self.half_extent, self.points_per_axis)
        # antisymmetrize so mirror nodes are exact negatives and an odd count
        # puts the center node at exactly 0 (linspace alone leaves ~1e-15)
        return 0.5 * (ax - ax[::-1])


def build_grid(dim: int, half_extent: float, points_per_axis: int) -> Grid:
    """Validated Grid constructor."""
    return Grid(dim, float(half_extent), int(points_per_axis))


@lru_cache(maxsize=16)
def node_coordinates(grid: Grid) -> NDArray:
    """All node coordinates as a (num_nodes, dim) array in row-major order."""
    ax = grid.axis()
    if grid.dim == 1:
        return ax[:, None].copy()
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


@dataclass
class GridField:
    """Real-valued function sampled on a grid, stored row-major and flat."""

    grid: Grid
    values: NDArray = field(repr=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.num_nodes:
            raise ValueError(
                f"values length {self.values.size} does not match grid with {self.grid.num_nodes} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must all be finite")

    def reshaped(self) -> NDArray:
        return self.values.reshape(self.grid.shape)

    def with_values(self, values: NDArray) -> "GridField":
        return GridField(self.grid, values)

    def copy(self) -> "GridField":
        return GridField(self.grid, self.values.copy())


def _require_same_grid(u: GridField, v: GridField) -> None:
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")


# ---------------------------------------------------------------------------
# array-level kernels (solvers call these directly to skip field validation)
# ---------------------------------------------------------------------------

def laplacian_array(grid: Grid, values: NDArray) -> NDArray:
    """Second-order central-difference Laplacian with zero ghost values."""
    h2 = grid.spacing**2
    a = values.reshape(grid.shape)
    out = -2.0 * grid.dim * a.copy()
    for axis in range(grid.dim):
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        out[tuple(lo)] += a[tuple(hi)]
        out[tuple(hi)] += a[tuple(lo)]
    return (out / h2).ravel()


def integrate_array(grid: Grid, values: NDArray) -> float:
    # np.sum uses pairwise summation on a contiguous row-major array, which is
    # a fixed reduction order: results are reproducible bit for bit.
    return float(grid.cell_volume * np.sum(values))


def gradient_arrays(grid: Grid, values: NDArray) -> list[NDArray]:
    """Centered-difference gradient components with zero ghost values."""
    a = values.reshape(grid.shape)
    two_h = 2.0 * grid.spacing
    comps = []
    for axis in range(grid.dim):
        g = np.zeros_like(a)
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        mid = [slice(None)] * grid.dim
        lo[axis] = slice(None, -2)
        hi[axis] = slice(2, None)
        mid[axis] = slice(1, -1)
        g[tuple(mid)] = a[tuple(hi)] - a[tuple(lo)]
        first = [slice(None)] * grid.dim
        first[axis] = 0
        second = [slice(None)] * grid.dim
        second[axis] = 1
        g[tuple(first)] = a[tuple(second)]  # ghost on the left is zero
        last = [slice(None)] * grid.dim
        last[axis] = -1
        before = [slice(None)] * grid.dim
        before[axis] = -2
        g[tuple(last)] = -a[tuple(before)]  # ghost on the right is zero
        comps.append((g / two_h).ravel())
    return comps


def kinetic_array(grid: Grid, u: NDArray, v: NDArray) -> float:
    """Dirichlet form <-Lap_h u, v> with the quadrature weight h^N.

    This is the exact quadratic form of ``laplacian_array`` (summation by
    parts holds exactly with zero ghosts), so energies built from it have the
    stencil Laplacian as their exact discrete gradient.
    """
    return -integrate_array(grid, laplacian_array(grid, u) * v)


# ---------------------------------------------------------------------------
# public field operations
# ---------------------------------------------------------------------------

def laplacian_apply(u: GridField) -> GridField:
    """Apply the discrete Laplacian; second-order accurate in the interior."""
    return GridField(u.grid, laplacian_array(u.grid, u.values))


def integrate(u: GridField) -> float:
    """Rectangle-rule integral with uniform weight h^N per node."""
    return integrate_array(u.grid, u.values)


def h1_inner(u: GridField, v: GridField, weight: GridField) -> float:
    """Weighted H1 pairing  integral(grad u . grad v + weight * u * v).

    Gradients are centered differences with zero ghosts.  The weight field is
    the sampled V(eps x) + 1 and must be strictly positive everywhere (the
    potential must stay above -1).
    """
    _require_same_grid(u, v)
    _require_same_grid(u, weight)
    if not np.all(weight.values > 0):
        raise ValueError("weight field must be strictly positive")
    gu = gradient_arrays(u.grid, u.values)
    gv = gradient_arrays(v.grid, v.values)
    dot = sum(a * b for a, b in zip(gu, gv))
    return integrate_array(u.grid, dot + weight.values * u.values * v.values)


# ---------------------------------------------------------------------------
# text dump format: header lines dim, L, n then one value per line
# ---------------------------------------------------------------------------

def dump_field(u: GridField, path: str) -> None:
    """Write a field as text: dim, half_extent, n header then row-major values."""
    lines = [
        f"{u.grid.dim:d}",
        f"{u.grid.half_extent:.17g}",
        f"{u.grid.points_per_axis:d}",
    ]
    lines.extend(f"{x:.17g}" for x in u.values)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path: str) -> GridField:
    """Read a field written by :func:`dump_field`; round-trips bit exactly."""
    with open(path, "r", encoding="ascii") as fh:
        dim = int(fh.readline())
        half_extent = float(fh.readline())
        n = int(fh.readline())
        values = np.array([float(line) for line in fh], dtype=float)
    return GridField(Grid(dim, half_extent, n), values)
