"""
구면 격자, 미분 연산자, 구적 테스트
"""

import numpy as np
import pytest

from ancientflow.exceptions import FieldError, GridError
from ancientflow.models.flow_models import ScalarField
from ancientflow.services.sphere_core import (
    build_grid,
    grad_sq_sphere,
    integrate_sphere,
    laplace_beltrami,
    mercator_dx_dpsi,
    mercator_psi,
    mercator_x,
    partial_psi,
    partial_theta,
    quadrature_weights,
    rotate_theta,
)


def _laplace_error(n_psi: int) -> float:
    grid = build_grid(n_psi, 1)
    field = ScalarField.from_profile(grid, np.sin)
    return float(np.max(np.abs(laplace_beltrami(field).values + 2.0 * field.values)))


def test_build_grid_staggered_latitudes():
    grid = build_grid(8, 1)
    assert grid.shape == (8, 1)
    assert grid.h_psi == pytest.approx(np.pi / 8)
    assert grid.psi_nodes[0] == pytest.approx(-np.pi / 2 + np.pi / 16)
    assert grid.psi_nodes[-1] == pytest.approx(np.pi / 2 - np.pi / 16)
    assert np.all(np.abs(grid.psi_nodes) < np.pi / 2)


def test_build_grid_two_dimensional():
    grid = build_grid(16, 8)
    assert grid.shape == (16, 8)
    assert not grid.is_axisymmetric
    assert grid.h_theta == pytest.approx(np.pi / 4)
    np.testing.assert_allclose(grid.theta_nodes, np.arange(8) * np.pi / 4)


@pytest.mark.parametrize("n_psi, n_theta", [(4, 1), (0, 1), (16, 0), (16, 7), (16, 2), (16, 6)])
def test_build_grid_rejects_invalid_sizes(n_psi, n_theta):
    with pytest.raises(GridError):
        build_grid(n_psi, n_theta)


def test_laplacian_of_constant_is_zero(grid64, grid2d):
    for grid in (grid64, grid2d):
        field = ScalarField(grid, np.full(grid.shape, 3.0))
        assert np.all(laplace_beltrami(field).values == 0.0)
        assert np.all(grad_sq_sphere(field).values == 0.0)


def test_laplacian_second_order_on_degree_one_harmonic():
    """Delta sin(psi) = -2 sin(psi)"""
    coarse, fine = _laplace_error(64), _laplace_error(128)
    assert fine < 1e-3
    assert 3.5 <= coarse / fine <= 4.5


def test_grad_sq_of_sin(grid128):
    field = ScalarField.from_profile(grid128, np.sin)
    expected = np.cos(grid128.psi_column) ** 2
    np.testing.assert_allclose(grad_sq_sphere(field).values, expected, atol=1e-3)


def test_partial_psi_orders(grid128):
    field = ScalarField.from_profile(grid128, lambda psi: np.sin(psi) ** 2)
    psi = grid128.psi_column
    np.testing.assert_allclose(partial_psi(field, 1).values, np.sin(2 * psi), atol=1e-3)
    np.testing.assert_allclose(partial_psi(field, 2).values, 2 * np.cos(2 * psi), atol=1e-3)
    np.testing.assert_allclose(partial_psi(field, 3).values, -4 * np.sin(2 * psi), atol=1e-2)
    np.testing.assert_allclose(partial_psi(field, 4).values, -8 * np.cos(2 * psi), atol=1e-2)


def test_partial_psi_rejects_unknown_order(grid64):
    field = ScalarField(grid64, np.ones(grid64.shape))
    with pytest.raises(ValueError):
        partial_psi(field, 5)
    with pytest.raises(ValueError):
        partial_theta(field, 3)


def test_partial_theta(grid64):
    grid = build_grid(16, 32)
    field = ScalarField.from_function(grid, lambda psi, theta: np.cos(theta))
    np.testing.assert_allclose(partial_theta(field, 1).values, -np.sin(grid.theta_row) * np.ones(grid.shape), atol=1e-2)
    axisymmetric = ScalarField(grid64, np.ones(grid64.shape))
    assert np.all(partial_theta(axisymmetric).values == 0.0)


def test_integrate_constant_gives_sphere_area(grid64, grid2d):
    for grid in (grid64, grid2d):
        assert integrate_sphere(ScalarField(grid, np.ones(grid.shape))) == pytest.approx(4 * np.pi, rel=5e-3)


def test_quadrature_weights_sum_to_two(grid128):
    assert quadrature_weights(grid128).sum() == pytest.approx(2.0, rel=1e-4)


def test_integrate_odd_function_vanishes(grid64):
    field = ScalarField.from_profile(grid64, np.sin)
    assert integrate_sphere(field) == pytest.approx(0.0, abs=1e-13)


def test_rotate_theta_is_exact_cyclic_shift(rng):
    grid = build_grid(16, 16)
    field = ScalarField(grid, rng.uniform(1.0, 2.0, grid.shape))
    rotated = rotate_theta(field, 3)
    np.testing.assert_array_equal(rotated.values[:, 0], field.values[:, 3])
    np.testing.assert_array_equal(rotate_theta(rotated, 13).values, field.values)
    assert integrate_sphere(rotated) == pytest.approx(integrate_sphere(field), rel=1e-14)


def test_rotate_axisymmetric_field_fails(grid64):
    with pytest.raises(FieldError):
        rotate_theta(ScalarField(grid64, np.ones(grid64.shape)), 1)


def test_scalar_field_rejects_bad_values(grid64):
    with pytest.raises(FieldError):
        ScalarField(grid64, np.ones((63, 1)))
    values = np.ones(grid64.shape)
    values[5, 0] = np.nan
    with pytest.raises(FieldError):
        ScalarField(grid64, values)


def test_mercator_round_trip():
    psi = np.linspace(-1.5, 1.5, 31)
    x = mercator_x(psi)
    np.testing.assert_allclose(mercator_psi(x), psi, atol=1e-14)
    np.testing.assert_allclose(np.cosh(x), 1.0 / np.cos(psi), rtol=1e-12)
    np.testing.assert_allclose(mercator_dx_dpsi(psi), 1.0 / np.cos(psi))
    assert mercator_x(0.0) == 0.0


def test_mercator_undefined_at_poles():
    with pytest.raises(FieldError):
        mercator_x(np.pi / 2)
    with pytest.raises(FieldError):
        mercator_x(np.array([0.0, -np.pi / 2]))


def _cos_sq_laplace_error(n_psi: int) -> float:
    grid = build_grid(n_psi, 1)
    field = ScalarField.from_profile(grid, lambda psi: np.cos(psi) ** 2)
    expected = 6.0 * np.sin(grid.psi_column) ** 2 - 2.0
    return float(np.max(np.abs(laplace_beltrami(field).values - expected)))


def test_laplacian_of_cos_squared():
    """Delta cos^2(psi) = 6 sin^2(psi) - 2"""
    coarse, fine = _cos_sq_laplace_error(64), _cos_sq_laplace_error(128)
    assert fine < 1.5e-3
    assert 3.5 <= coarse / fine <= 4.5


def test_integral_of_laplacian_is_second_order():
    def integral(n_psi):
        grid = build_grid(n_psi, 1)
        return integrate_sphere(laplace_beltrami(ScalarField.from_profile(grid, lambda psi: np.cos(psi) ** 2)))

    coarse, fine = integral(32), integral(64)
    assert 3.5 <= coarse / fine <= 4.5
    assert fine == pytest.approx(-2.0 * np.pi / 9.0 * (np.pi / 64) ** 2, rel=0.05)


def test_third_derivative_of_sin():
    def error(n_psi):
        grid = build_grid(n_psi, 1)
        field = ScalarField.from_profile(grid, np.sin)
        return float(np.max(np.abs(partial_psi(field, 3).values + np.cos(grid.psi_column))))

    coarse, fine = error(64), error(128)
    assert fine < 2e-4
    assert 3.5 <= coarse / fine <= 4.5


def test_laplacian_commutes_with_rotation(rng):
    grid = build_grid(16, 16)
    field = ScalarField(grid, rng.uniform(1.0, 2.0, grid.shape))
    for k in (1, 5, 8):
        np.testing.assert_array_equal(
            laplace_beltrami(rotate_theta(field, k)).values, rotate_theta(laplace_beltrami(field), k).values
        )
        np.testing.assert_array_equal(
            grad_sq_sphere(rotate_theta(field, k)).values, rotate_theta(grad_sq_sphere(field), k).values
        )


def _x_coordinate_laplace_error(n: int, max_abs_psi: float) -> float:
    """f = cos(psi) cos(theta) 는 극을 지나며 부호가 바뀌므로 theta + pi 유령 행이 필요하다"""
    grid = build_grid(n, n)
    field = ScalarField.from_function(grid, lambda psi, theta: np.cos(psi) * np.cos(theta))
    error = np.abs(laplace_beltrami(field).values + 2.0 * field.values)
    rows = np.abs(grid.psi_nodes) <= max_abs_psi
    return float(np.max(error[rows]))


def test_two_dimensional_laplacian_across_poles():
    # 극에 인접한 행은 1차 (오차 약 h/3), 그 밖은 2차
    for n in (16, 32):
        assert _x_coordinate_laplace_error(n, np.pi / 2) <= 0.5 * np.pi / n
    coarse, fine = _x_coordinate_laplace_error(32, np.pi / 3), _x_coordinate_laplace_error(64, np.pi / 3)
    assert fine < 2e-3
    assert 3.5 <= coarse / fine <= 4.5


def test_mercator_value_at_sixty_degrees():
    assert mercator_x(np.pi / 3) == pytest.approx(np.log(2.0 + np.sqrt(3.0)), rel=1e-14)
    assert mercator_psi(np.log(2.0 + np.sqrt(3.0))) == pytest.approx(np.pi / 3, rel=1e-14)
