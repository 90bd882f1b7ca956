import dataclasses
import math

import numpy as np
import pytest
from scipy.integrate import quad, simpson

from physics.diagnostics import (elliptic_ratio, ellipticity, energy_j, energy_ji, energy_report,
                                 eulerian_mass, eulerian_reconstruct, fit_decay_rate, hardy_check,
                                 hardy_refinement, hardy_test_family, regularity_order, pointwise_decay_check,
                                 time_derivatives, vacuum_slope)
from physics.errors import (DegenerateDenominator, DomainError, InsufficientSamples, NonpositiveEnergy,
                            OrderUnavailable)
from physics.solver import apply_perturbation, evolve, initial_state
from physics.stencils import build_grid


@pytest.fixture
def unit_state(unit_profile):
    return initial_state(unit_profile, build_grid(unit_profile, 128))


def _with_zeta(state, zeta):
    return dataclasses.replace(state, zeta=zeta)


def test_equilibrium_energies_vanish(unit_state):
    report = energy_report(unit_state)
    assert report.total == 0.0
    assert report.dissipation_total == 0.0
    assert report.sup_norm == 0.0
    assert report.order_cap == 3


def test_energy_of_constant_dilation(unit_state):
    c = 0.01
    state = _with_zeta(unit_state, np.full_like(unit_state.zeta, c))
    # ∫_1^2 (y⁴σ + y²σ²) dy with σ = 1/y - 1/2
    assert energy_j(state, 0) == pytest.approx(c ** 2 * 11.0 / 15.0, rel=1e-6)


def test_energy_is_quadratic(reference_profile):
    state = apply_perturbation(initial_state(reference_profile, build_grid(reference_profile, 64)), 2, 1e-3)
    doubled = dataclasses.replace(state, zeta=2.0 * state.zeta)
    assert energy_j(doubled, 0) == pytest.approx(4.0 * energy_j(state, 0), rel=1e-12)


def test_spatial_energy_of_constant_is_zero(unit_state):
    state = _with_zeta(unit_state, np.full_like(unit_state.zeta, 0.01))
    for i in (1, 2, 3):
        assert energy_ji(state, 0, i) == pytest.approx(0.0, abs=1e-12)


def test_spatial_energy_against_adaptive_quadrature(unit_state):
    y = unit_state.grid.nodes
    state = _with_zeta(unit_state, (y - 1.0) * (2.0 - y))

    def integrand(r):
        sigma = 1.0 / r - 0.5
        return r ** 2 * sigma * (3.0 - 2.0 * r) ** 2 + r ** 4 * sigma ** 3 * 4.0

    expected, _ = quad(integrand, 1.0, 2.0, epsabs=0.0, epsrel=1e-12)
    assert energy_ji(state, 0, 1) == pytest.approx(expected, rel=1e-6)


def test_energy_order_limits(unit_state):
    with pytest.raises(OrderUnavailable):
        time_derivatives(unit_state, 3)
    with pytest.raises(OrderUnavailable):
        energy_ji(unit_state, 0, 0)
    with pytest.raises(OrderUnavailable):
        energy_ji(unit_state, 2, 2)


def test_time_derivatives_of_perturbed_state(reference_profile):
    state = apply_perturbation(initial_state(reference_profile, build_grid(reference_profile, 64)), 1, 1e-3)
    fields = time_derivatives(state, 2)
    assert len(fields) == 4
    assert all(values[0] == 0.0 for values in fields)
    report = energy_report(state)
    assert report.total > 0.0
    assert report.e_j[2] > 0.0
    assert math.isfinite(report.sup_norm)


@pytest.mark.parametrize("gamma, expected", [(7.0 / 5.0, 6), (5.0 / 3.0, 5), (2.0, 5), (4.0 / 3.0, 7)])
def test_regularity_order(gamma, expected):
    assert regularity_order(1.0 / (gamma - 1.0)) == expected


def test_elliptic_ratio_without_samples(small_state):
    with pytest.raises(DegenerateDenominator):
        ellipticity(energy_report(small_state))
    trajectory = evolve(small_state, 1.0, 0.5)
    ratio = elliptic_ratio(trajectory)
    assert ratio.max_ratio == 0.0
    assert ratio.n_samples == 0
    assert ratio.first_after(0.0) is None


def test_hardy_constant_function(unit_profile):
    grid = build_grid(unit_profile, 256)
    ones = np.ones_like(grid.nodes)
    result = hardy_check(unit_profile, grid, 2.0, ones, np.zeros_like(ones))
    expected_rhs = -math.log(2.0) + 2.0 / 3.0 + math.log(1.5) - 0.375
    assert result.lhs == pytest.approx(0.5, rel=1e-12)
    assert result.rhs == pytest.approx(expected_rhs, rel=1e-3)
    assert math.isfinite(result.ratio)


def test_hardy_zero_function(unit_profile):
    grid = build_grid(unit_profile, 64)
    zeros = np.zeros_like(grid.nodes)
    result = hardy_check(unit_profile, grid, 2.0, zeros, zeros)
    assert (result.lhs, result.rhs, result.ratio) == (0.0, 0.0, 0.0)


def test_hardy_exponent_must_exceed_one(unit_profile):
    grid = build_grid(unit_profile, 64)
    with pytest.raises(DomainError):
        hardy_check(unit_profile, grid, 1.0, np.ones_like(grid.nodes), np.zeros_like(grid.nodes))


@pytest.mark.parametrize("k", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("name", ["one", "sigma", "gap_squared"])
def test_hardy_ratio_is_mesh_stable(reference_profile, k, name):
    test_fn = hardy_test_family(reference_profile)[name]
    result = hardy_refinement(reference_profile, k, test_fn, 128)
    assert math.isfinite(result.fine.ratio)
    assert result.fine.ratio > 0.0
    assert result.relative_change <= 0.05


def test_fit_exact_exponential():
    t = np.arange(0.0, 10.0 + 1e-12, 0.5)
    fit = fit_decay_rate(t, np.exp(-0.5 * t), (0.0, 10.0))
    assert fit.delta_hat == pytest.approx(0.5, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_samples == 21


def test_fit_noisy_exponential():
    t = np.arange(0.0, 10.0 + 1e-12, 0.5)
    energies = 3.0 * np.exp(-1.2 * t) * (1.0 + 0.01 * np.sin(7.0 * t))
    fit = fit_decay_rate(t, energies, (0.0, 10.0))
    assert fit.delta_hat == pytest.approx(1.2, abs=0.02)


def test_fit_constant_series():
    t = np.arange(0.0, 10.0 + 1e-12, 0.5)
    fit = fit_decay_rate(t, np.full_like(t, 2.0), (0.0, 10.0))
    assert fit.delta_hat == 0.0
    assert fit.r_squared == 0.0


def test_fit_errors():
    t = np.arange(0.0, 10.0 + 1e-12, 0.5)
    with pytest.raises(InsufficientSamples):
        fit_decay_rate(t, np.exp(-t), (0.0, 2.0))
    energies = np.exp(-t)
    energies[5] = 0.0
    with pytest.raises(NonpositiveEnergy):
        fit_decay_rate(t, energies, (0.0, 10.0))
    with pytest.raises(DomainError):
        fit_decay_rate(t, np.exp(-t), (5.0, 5.0))


def test_reconstruct_equilibrium(reference_profile):
    state = initial_state(reference_profile, build_grid(reference_profile, 64))
    fields = eulerian_reconstruct(state)
    np.testing.assert_array_equal(fields.density, state.background.rho_bar)
    assert np.all(fields.velocity == 0.0)
    assert fields.boundary_radius == 2.5


def test_reconstruct_constant_dilation(reference_profile):
    state = initial_state(reference_profile, build_grid(reference_profile, 64))
    c = 0.02
    dilated = _with_zeta(state, np.full_like(state.zeta, c))
    fields = eulerian_reconstruct(dilated)
    np.testing.assert_allclose(fields.density, state.background.rho_bar / (1.0 + c) ** 3, rtol=1e-9, atol=1e-15)
    assert fields.boundary_radius == pytest.approx(2.5 * (1.0 + c), rel=1e-15)
    assert eulerian_mass(fields) == pytest.approx(eulerian_mass(eulerian_reconstruct(state)), rel=1e-9)


def test_reconstructed_mass_matches_profile(reference_profile):
    state = initial_state(reference_profile, build_grid(reference_profile, 256))
    assert eulerian_mass(eulerian_reconstruct(state)) == pytest.approx(reference_profile.total_mass, rel=1e-5)


@pytest.mark.parametrize("mode", [1, 2, 5])
def test_reconstructed_mass_is_lagrangian_mass(reference_profile, mode):
    grid = build_grid(reference_profile, 256)
    state = apply_perturbation(initial_state(reference_profile, grid), mode, 1e-3)
    # 同じ節点上の Lagrange 質量 4π∫ρ̄y²dy
    lagrangian = 4.0 * math.pi * float(simpson(state.background.rho_bar * grid.nodes ** 2, x=grid.nodes))
    assert eulerian_mass(eulerian_reconstruct(state)) == pytest.approx(lagrangian, rel=1e-6)



def test_vacuum_slope_at_equilibrium(unit_state):
    assert vacuum_slope(unit_state) == pytest.approx(-0.25, rel=1e-6)


def test_pointwise_check_on_equilibrium(small_state):
    trajectory = evolve(small_state, 2.0, 0.5)
    result = pointwise_decay_check(trajectory, (0.0, 2.0))
    assert result.trivial
    assert result.velocity is None
    assert result.boundary is None
