import numpy as np
import pytest

from lognls.grid import Grid, GridField, build_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def grid_1d():
    return build_grid(1, 10.0, 257)


@pytest.fixture
def grid_2d():
    return build_grid(2, 7.0, 65)


def smooth_field(grid: Grid, rng, n_bumps: int = 4, positive: bool = False) -> GridField:
    """Random decaying mixture of Gaussian bumps; widths stay off extremal values."""
    from lognls.grid import node_coordinates

    pts = node_coordinates(grid)
    values = np.zeros(grid.num_nodes)
    for _ in range(n_bumps):
        center = rng.uniform(-3.0, 3.0, size=grid.dim)
        width = rng.uniform(0.7, 2.2)
        amp = rng.uniform(0.5, 2.0) * (1.0 if positive else rng.choice([-1.0, 1.0]))
        values += amp * np.exp(-np.sum((pts - center) ** 2, axis=1) / (2 * width**2))
    if positive:
        values = np.abs(values) + 1e-3 * np.exp(-np.sum(pts**2, axis=1) / 2)
    return GridField(grid, values)
