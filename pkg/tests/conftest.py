"""
テスト共通のフィクスチャ
"""
import pytest

from physics.equilibrium import GasParameters, build_profile
from physics.solver import initial_state
from physics.stencils import build_grid


@pytest.fixture
def reference_gas():
    # 基準シナリオ γ=5/3, A=1, g₀=1, r₀=1
    return GasParameters(gamma=5.0 / 3.0)


@pytest.fixture
def reference_profile(reference_gas):
    return build_profile(reference_gas, 2.5)


@pytest.fixture
def unit_gas():
    # γ=2, A=1, g₀=2 で Ā=1
    return GasParameters(gamma=2.0, pressure_const=1.0, core_gravity=2.0)


@pytest.fixture
def unit_profile(unit_gas):
    return build_profile(unit_gas, 2.0)


@pytest.fixture
def small_state(reference_profile):
    grid = build_grid(reference_profile, 32)
    return initial_state(reference_profile, grid)
