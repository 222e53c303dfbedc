"""
공용 테스트 픽스처
"""

import numpy as np
import pytest

from ancientflow.models.flow_models import ClosedFormSolution, FlowState, ScalarField
from ancientflow.services.sphere_core import build_grid


@pytest.fixture
def rosenau():
    return ClosedFormSolution.rosenau(1.0)


@pytest.fixture
def sphere():
    return ClosedFormSolution.contracting_sphere()


@pytest.fixture
def grid64():
    return build_grid(64, 1)


@pytest.fixture
def grid128():
    return build_grid(128, 1)


@pytest.fixture
def grid2d():
    return build_grid(16, 8)


@pytest.fixture
def constant_state():
    """수축 구면 t = -1: v = 1/2"""
    grid = build_grid(16, 1)
    return FlowState(t=-1.0, v=ScalarField(grid, np.full(grid.shape, 0.5)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
