import numpy as np
import pytest

from bochner import Grid, GridFunction, MatrixOperator, ValueSpace, Weight


@pytest.fixture
def grid64():
    return Grid((np.pi,), (64,))


@pytest.fixture
def scalar_space():
    return ValueSpace(1, 2.0)


@pytest.fixture
def ones64(grid64):
    return Weight.one(grid64)


@pytest.fixture
def identity_op(scalar_space):
    return MatrixOperator(np.eye(1), scalar_space)


def lattice_mode(grid, space, index, component=0, amplitude=1.0):
    """exp(i pi j . x / L) placed in one value-space coordinate."""
    mesh = grid.mesh()
    phase = np.zeros(grid.sizes)
    for k, j in enumerate(index):
        phase = phase + (np.pi * j / grid.extents[k]) * mesh[k]
    values = np.zeros(grid.sizes + (space.dim,), dtype=complex)
    values[..., component] = amplitude * np.exp(1j * phase)
    return GridFunction(grid, space, values)


def random_function(grid, space, rng):
    shape = grid.sizes + (space.dim,)
    return GridFunction(grid, space, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
