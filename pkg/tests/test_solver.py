import dataclasses
import math

import numpy as np
import pytest

from physics.equilibrium import equilibrium_density
from physics.errors import AmplitudeTooLarge, CflViolation, DomainError, EvolutionError, JacobianDegenerate
from physics.solver import (acceleration, apply_perturbation, build_background, evolve, initial_state,
                            restoring_force, spatial_operator, stable_dt, step)
from physics.spectrum import assemble_linearized
from physics.stencils import build_grid
from utils.file_utils import is_debug, set_debug


def _shape(state, mode=1):
    y = state.grid.nodes
    profile = state.profile
    return np.sin(mode * math.pi * (y - 1.0) / (2.0 * (profile.outer_radius - 1.0)))


def _core_flat_shape(state):
    # y = r₀ で2階微分まで消える方向
    y = state.grid.nodes
    return (y - 1.0) ** 3 * np.sin(math.pi * (y - 1.0) / (state.profile.outer_radius - 1.0))


def test_equilibrium_is_stationary(small_state):
    assert np.all(acceleration(small_state) == 0.0)
    assert np.all(spatial_operator(small_state.background, small_state.zeta) == 0.0)


def test_zero_amplitude_leaves_state_unchanged(small_state):
    assert apply_perturbation(small_state, 1, 0.0) is small_state


@pytest.mark.parametrize("kind", ["displacement", "velocity"])
def test_perturbation_pins_core_surface(small_state, kind):
    state = apply_perturbation(small_state, 3, 1e-3, kind)
    assert state.zeta[0] == 0.0
    assert state.zeta_t[0] == 0.0
    target = state.zeta if kind == "displacement" else state.zeta_t
    other = state.zeta_t if kind == "displacement" else state.zeta
    assert np.max(np.abs(target)) == pytest.approx(1e-3 * np.max(np.abs(_shape(small_state, 3))), rel=1e-14)
    assert np.all(other == 0.0)


def test_perturbation_limits(small_state):
    with pytest.raises(AmplitudeTooLarge):
        apply_perturbation(small_state, 1, 0.5)
    with pytest.raises(DomainError):
        apply_perturbation(small_state, 1, 1e-3, kind="pressure")


def test_zero_state_step_is_zero(small_state):
    nxt = step(small_state, 0.5 * stable_dt(small_state))
    assert np.all(nxt.zeta == 0.0)
    assert np.all(nxt.zeta_t == 0.0)
    assert nxt.time > 0.0


def test_damping_is_integrated_exactly(small_state):
    velocity = 1e-3 * _shape(small_state)
    state = dataclasses.replace(small_state, zeta_t=velocity)
    dt = 0.05
    nxt = step(state, dt, operator=lambda zeta: np.zeros_like(zeta), check_cfl=False)
    np.testing.assert_allclose(nxt.zeta_t, math.exp(-dt) * velocity, rtol=1e-15, atol=0.0)


def test_step_rejects_cfl_violation(small_state):
    with pytest.raises(CflViolation):
        step(small_state, 2.0 * stable_dt(small_state))


def test_stable_dt_halves_on_uniform_refinement(reference_profile):
    dts = [stable_dt(initial_state(reference_profile, build_grid(reference_profile, n, 1.0))) for n in (64, 128)]
    assert dts[0] > 0.0
    assert 1.8 <= dts[0] / dts[1] <= 2.2


def test_graded_mesh_keeps_comparable_dt(reference_profile):
    graded = stable_dt(initial_state(reference_profile, build_grid(reference_profile, 128, 2.0)))
    uniform = stable_dt(initial_state(reference_profile, build_grid(reference_profile, 128, 1.0)))
    assert graded >= 0.9 * uniform


def test_constant_dilation(reference_profile):
    grid = build_grid(reference_profile, 64)
    background = build_background(reference_profile, grid)
    c = 0.01
    force = restoring_force(background, np.full_like(grid.nodes, c))
    gamma = 5.0 / 3.0
    basis = grid.basis
    y = basis.points
    # 一様な膨張の厳密な加速度 ζ_tt = g₀/y³((1+c)^{2-3γ} - (1+c)^{-2}) を M(yζ_tt) = -F で要素に載せる
    zeta_tt = ((1.0 + c) ** (2.0 - 3.0 * gamma) - (1.0 + c) ** -2.0) / y ** 3
    load = basis.weights * equilibrium_density(reference_profile, y) * y ** 2
    expected = -(basis.values.T @ (load * y * zeta_tt))
    np.testing.assert_allclose(force[1:], expected[1:], rtol=1e-7, atol=1e-9 * np.max(np.abs(expected)))


def test_rest_force_balances_gravity(reference_profile):
    background = build_background(reference_profile, build_grid(reference_profile, 64))
    form = background.weak_form
    gravity = form.basis.values.T @ (form.mass * reference_profile.params.core_gravity / form.basis.points ** 2)
    assert np.max(np.abs(background.rest_force[1:])) <= 1e-9 * np.max(np.abs(gravity))


def test_degenerate_jacobian_is_reported(small_state):
    with pytest.raises(JacobianDegenerate):
        spatial_operator(small_state.background, np.full_like(small_state.zeta, -0.95))


def test_linearization_consistency(reference_profile):
    grid = build_grid(reference_profile, 64)
    state = initial_state(reference_profile, grid)
    operator = assemble_linearized(reference_profile, grid)
    direction = _shape(state)
    errors = []
    for eps in (1e-3, 5e-4):
        nonlinear = spatial_operator(state.background, eps * direction)
        linear = eps * operator.acceleration(direction)
        errors.append(np.linalg.norm(nonlinear - linear) / np.linalg.norm(linear))
    assert 1.7 <= errors[0] / errors[1] <= 2.3


def test_temporal_convergence(reference_profile):
    grid = build_grid(reference_profile, 32)
    start = apply_perturbation(initial_state(reference_profile, grid), 1, 1e-3)
    base_dt = 0.5 * stable_dt(start)
    n_base = 20

    def integrate(refine):
        state = start
        for _ in range(n_base * refine):
            state = step(state, base_dt / refine)
        return state.zeta

    reference = integrate(16)
    coarse = np.max(np.abs(integrate(1) - reference))
    fine = np.max(np.abs(integrate(2) - reference))
    assert coarse / fine >= 12.0


def test_spatial_self_convergence(reference_profile):
    values = []
    for n_cells in (64, 128, 512):
        state = initial_state(reference_profile, build_grid(reference_profile, n_cells))
        stride = n_cells // 64
        values.append(spatial_operator(state.background, 1e-3 * _core_flat_shape(state))[::stride])
    coarse = np.max(np.abs(values[0] - values[2]))
    fine = np.max(np.abs(values[1] - values[2]))
    assert coarse / fine >= 2.0 ** 3.5



def test_evolve_equilibrium(small_state):
    trajectory = evolve(small_state, 2.0, 0.5)
    np.testing.assert_allclose(trajectory.times, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert max(np.max(np.abs(state.zeta)) for state in trajectory.states) <= 1e-10
    assert all(report.total == 0.0 for report in trajectory.reports)


def test_evolve_requires_future_end_time(small_state):
    with pytest.raises(DomainError):
        evolve(small_state, 0.0, 0.5)
    with pytest.raises(DomainError):
        evolve(small_state, 1.0, 0.0)


def test_evolve_wraps_failures_with_time(small_state):
    broken = dataclasses.replace(small_state, zeta=np.full_like(small_state.zeta, -0.95))
    with pytest.raises(EvolutionError) as excinfo:
        evolve(broken, 1.0, 0.5, reporter=lambda state: None)
    assert excinfo.value.code == "jacobian_degenerate"
    assert excinfo.value.failure_time == 0.0


def test_small_perturbation_decays(reference_profile):
    grid = build_grid(reference_profile, 32)
    state = apply_perturbation(initial_state(reference_profile, grid), 1, 1e-3)
    trajectory = evolve(state, 6.0, 0.5)
    energies = np.array([report.total for report in trajectory.reports])
    assert energies[-1] < energies[0]
    assert trajectory.states[-1].zeta[0] == 0.0


@pytest.mark.parametrize("debug", [False, True])
def test_evolve_accepts_reporter_without_energy(small_state, debug):
    previous = is_debug()
    set_debug(debug)
    try:
        trajectory = evolve(apply_perturbation(small_state, 1, 1e-3), 1.0, 0.5, reporter=lambda state: None)
    finally:
        set_debug(previous)
    assert trajectory.reports == [None, None, None]
    np.testing.assert_allclose(trajectory.times, [0.0, 0.5, 1.0])


def _run_summary(trajectory):
    energies = np.array([report.total for report in trajectory.reports])
    stretch = max(np.max(np.abs(state.grid.d1 @ state.eta - 1.0)) for state in trajectory.states)
    return energies, stretch


def test_moderate_resolution_run_decays(reference_profile):
    grid = build_grid(reference_profile, 128)
    state = apply_perturbation(initial_state(reference_profile, grid), 1, 1e-3)
    trajectory = evolve(state, 20.0, 1.0)
    energies, stretch = _run_summary(trajectory)
    assert np.all(np.isfinite(energies))
    assert energies[-1] < 1e-4 * energies[0]
    assert stretch <= 1e-2


@pytest.mark.slow
def test_fine_grid_long_run_decays(reference_profile):
    grid = build_grid(reference_profile, 256)
    state = apply_perturbation(initial_state(reference_profile, grid), 1, 1e-3)
    trajectory = evolve(state, 40.0, 2.0)
    energies, stretch = _run_summary(trajectory)
    assert np.all(np.isfinite(energies))
    assert energies[-1] < 1e-10 * energies[0]
    assert stretch <= 1e-2
