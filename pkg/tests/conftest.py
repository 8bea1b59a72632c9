"""Shared fixtures: canonical grids used across the suite."""

import numpy as np
import pytest

from parakit.grid import make_grid


@pytest.fixture
def torus64():
    """Periodic 64x64 grid on (0, 2pi)^2."""
    return make_grid(1, (64, 64), 2.0 * np.pi, 2.0 * np.pi)


@pytest.fixture
def box32():
    """Bounded 32x32 grid on (0, 1)^2."""
    return make_grid(1, (32, 32), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)


@pytest.fixture
def box48():
    """Bounded 48x48 grid on (0, 1)^2."""
    return make_grid(1, (48, 48), 1.0, 1.0, origin=(0.0, 0.0), periodic=False)
