import math

import numpy as np
import pytest
from scipy.integrate import quad

from physics.equilibrium import GasParameters, build_profile, equilibrium_density, sigma_and_slope
from physics.errors import UnstableMode
from physics.solver import build_background
from physics.spectrum import SpectrumResult, assemble_linearized, eigen_modes, lambda_roots, predicted_delta
from physics.stencils import build_grid


def _result(mu, **fields):
    mu = np.asarray(mu, dtype=float)
    return SpectrumResult(mu=mu, lambda_pairs=lambda_roots(mu), predicted_delta=math.nan,
                          n_modes=len(mu), residuals=np.zeros_like(mu), **fields)


def test_operator_on_constant_field(reference_profile):
    grid = build_grid(reference_profile, 64)
    operator = assemble_linearized(reference_profile, grid)
    basis = grid.basis
    y = basis.points
    gamma = 5.0 / 3.0
    c = 0.3
    _, sigma_y = sigma_and_slope(reference_profile, y)
    # (4-3γ)c(ρ̄^γ)_y with (ρ̄^γ)_y = γ/(γ-1)·ρ̄σ_y, weighted by y² against each basis function
    strong = (4.0 - 3.0 * gamma) * c * gamma / (gamma - 1.0) * equilibrium_density(reference_profile, y) * sigma_y
    expected = grid.nodes * (basis.values.T @ (basis.weights * y ** 2 * strong))
    result = operator.apply(np.full_like(grid.nodes, c))
    np.testing.assert_allclose(result[1:], expected[1:], rtol=1e-7, atol=1e-9 * np.max(np.abs(expected)))


def test_operator_on_zero_field(reference_profile):
    operator = assemble_linearized(reference_profile, build_grid(reference_profile, 32))
    assert np.all(operator.apply(np.zeros(33)) == 0.0)
    assert np.all(operator.acceleration(np.zeros(33)) == 0.0)


def test_operator_is_symmetric(reference_profile):
    operator = assemble_linearized(reference_profile, build_grid(reference_profile, 32))
    stiffness, weight = operator.pencil()
    scale = np.max(np.abs(stiffness))
    assert np.max(np.abs(stiffness - stiffness.T)) <= 1e-13 * scale
    assert np.max(np.abs(weight - weight.T)) <= 1e-13 * np.max(np.abs(weight))
    assert np.all(np.linalg.eigvalsh(weight) > 0.0)


def test_gravity_shift_matches_enclosed_mass():
    params = GasParameters(gamma=5.0 / 3.0, self_gravity_const=1e-2)
    profile = build_profile(params, 2.5)
    grid = build_grid(profile, 64)
    plain = assemble_linearized(profile, grid, gravity_enabled=False)
    heavy = assemble_linearized(profile, grid, gravity_enabled=True)
    shift = heavy.hessian - plain.hessian
    basis = grid.basis
    y = basis.points
    enclosed = np.array([quad(lambda t: equilibrium_density(profile, t) * t ** 2, 1.0, point,
                              epsabs=0.0, epsrel=1e-12)[0] for point in y])
    # δη = y - r₀ は要素で厳密に表せる
    load = basis.weights * equilibrium_density(profile, y) * y ** 2
    expected = basis.values.T @ (load * -8.0 * math.pi * 1e-2 * enclosed / y ** 3 * (y - 1.0))
    result = shift @ (grid.nodes - 1.0)
    np.testing.assert_allclose(result, expected, rtol=1e-4, atol=1e-8 * np.max(np.abs(expected)))
    assert abs(shift - shift.T).max() == 0.0


def test_lambda_roots():
    np.testing.assert_allclose(lambda_roots(0.25), [-0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(lambda_roots(0.5), [-0.5 + 0.5j, -0.5 - 0.5j], atol=1e-15)
    roots = lambda_roots(np.array([0.1, 0.3, 2.0]))
    assert roots.shape == (3, 2)
    np.testing.assert_allclose(roots ** 2 + roots + np.array([0.1, 0.3, 2.0])[:, None], 0.0, atol=1e-14)


def test_predicted_delta():
    assert predicted_delta(_result([3.0 / 16.0, 1.0])) == pytest.approx(0.5, rel=1e-14)
    assert predicted_delta(_result([0.3, 1.0])) == 1.0
    with pytest.raises(UnstableMode):
        predicted_delta(_result([-0.1, 1.0]))


def test_predicted_delta_sees_discarded_modes():
    # 保持したモードは正でも、全体に不安定モードがあれば失敗する
    with pytest.raises(UnstableMode):
        predicted_delta(_result([0.3, 1.0], max_growth=0.2, n_unstable=1))


def test_reference_spectrum_is_stable(reference_profile):
    operator = assemble_linearized(reference_profile, build_grid(reference_profile, 64))
    result = eigen_modes(operator, 5)
    assert result.n_modes == 5
    assert np.all(result.mu > 0.0)
    assert np.all(np.diff(result.mu) >= 0.0)
    assert result.n_unstable == 0
    assert result.max_growth < 0.0
    assert result.symmetry_defect <= 1e-13
    assert np.max(result.residuals) <= 1e-6
    assert result.predicted_delta == predicted_delta(result)
    assert 0.0 < predicted_delta(result) <= 1.0
    roots = result.lambda_pairs
    np.testing.assert_allclose(roots ** 2 + roots + result.mu[:, None], 0.0, atol=1e-12)


@pytest.mark.parametrize("n_cells", [64, 128, 256])
def test_full_spectrum_has_no_growing_mode(reference_profile, n_cells):
    operator = assemble_linearized(reference_profile, build_grid(reference_profile, n_cells))
    result = eigen_modes(operator, 5)
    assert result.n_unstable == 0
    assert result.max_growth < 0.0
    assert result.mu[0] > 0.0


@pytest.mark.parametrize("gamma", [1.4, 2.0])
def test_full_spectrum_has_no_growing_mode_for_other_gamma(gamma):
    params = GasParameters(gamma=gamma)
    profile = build_profile(params, 1.0 + 0.5 * (4.0 / (3.0 - params.alpha) - 1.0))
    result = eigen_modes(assemble_linearized(profile, build_grid(profile, 128)), 5)
    assert result.n_unstable == 0
    assert result.max_growth < 0.0


def test_weight_floor_does_not_move_spectrum(reference_profile):
    operator = assemble_linearized(reference_profile, build_grid(reference_profile, 64))
    base = eigen_modes(operator, 5, 1e-10)
    doubled = eigen_modes(operator, 5, 2e-10)
    np.testing.assert_allclose(doubled.mu, base.mu, rtol=1e-3)


def test_background_mass_matrix_matches_weight(reference_profile):
    grid = build_grid(reference_profile, 32)
    background = build_background(reference_profile, grid)
    operator = assemble_linearized(reference_profile, grid)
    ones = np.ones_like(grid.nodes)
    # Σ_ij M_ij = ∫ρ̄y² dy
    total = float(ones @ (background.mass_matrix @ ones))
    assert total == pytest.approx(reference_profile.total_mass / (4.0 * math.pi), rel=1e-7)
    np.testing.assert_allclose((operator.weight @ ones), grid.nodes * (background.mass_matrix @ grid.nodes),
                               rtol=1e-12)


@pytest.mark.slow
def test_spectrum_mesh_refinement(reference_profile):
    spectra = [eigen_modes(assemble_linearized(reference_profile, build_grid(reference_profile, n)), 5)
               for n in (256, 512)]
    np.testing.assert_allclose(spectra[1].mu, spectra[0].mu, rtol=1e-4)
