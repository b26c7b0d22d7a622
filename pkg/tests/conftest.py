"""Shared fixtures: configs, small bodies and random configurations."""

import numpy as np
import pytest

from src.config import RunConfig
from src.services import LatticeService
from src.services.geometry import structured_grid


@pytest.fixture
def config() -> RunConfig:
    return RunConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture
def grid2d():
    return structured_grid((6, 5))


@pytest.fixture
def grid3d():
    return structured_grid((3, 3, 2))


@pytest.fixture
def lattice(config) -> LatticeService:
    return LatticeService(config)


@pytest.fixture
def random_config(lattice, grid2d, rng):
    return lattice.random_configuration(grid2d, rng)


@pytest.fixture
def random_config3d(lattice, grid3d, rng):
    return lattice.random_configuration(grid3d, rng)
