"""
진단량 및 경계량 모니터 테스트
"""

import math

import numpy as np
import pytest

from ancientflow.config import CSV_COLUMNS
from ancientflow.exceptions import GridError
from ancientflow.models.flow_models import EvolveVariable, FlowState, Perturbation, ScalarField
from ancientflow.services import closed_forms, diagnostics
from ancientflow.services.diagnostics import BoundMonitor, bound_report
from ancientflow.services.flow_solver import initial_state_from_closed_form
from ancientflow.services.sphere_core import build_grid


def _rosenau_qx_error(rosenau, n_psi: int) -> float:
    state = closed_forms.sample_state(rosenau, build_grid(n_psi, 1), -1.0)
    return float(np.max(np.abs(diagnostics.qx_field(state).values)))


def test_sphere_curvature_is_constant(constant_state):
    curvature = diagnostics.scalar_curvature(constant_state).values
    np.testing.assert_allclose(curvature, 1.0, rtol=1e-14)
    assert diagnostics.identity_check(constant_state) == 0.0


def test_identity_check_on_rosenau(rosenau, grid128):
    assert diagnostics.identity_check(closed_forms.sample_state(rosenau, grid128, -1.0)) <= 1e-10


def test_discrete_curvature_near_closed_form(rosenau, grid128):
    state = closed_forms.sample_state(rosenau, grid128, -1.0)
    expected = closed_forms.eval_scalar_curvature(rosenau, grid128.psi_column, -1.0)
    assert np.max(np.abs(diagnostics.scalar_curvature(state).values - expected)) < 5e-3


def test_rosenau_qx_converges_to_zero(rosenau):
    coarse, fine = _rosenau_qx_error(rosenau, 128), _rosenau_qx_error(rosenau, 256)
    assert fine <= 1e-3
    assert 3.5 <= coarse / fine <= 4.5


def test_eq67_holds_on_random_profiles(rng):
    grid = build_grid(64, 1)
    for _ in range(100):
        amplitudes = rng.uniform(-0.5, 0.5, 3)

        def profile(psi, a=amplitudes):
            return 2.0 + sum(a[k] * np.cos(2 * (k + 1) * psi) for k in range(3))

        state = FlowState(t=-1.0, v=ScalarField.from_profile(grid, profile))
        holds, violation = diagnostics.eq67_pointwise_check(state)
        assert holds and violation == 0.0


def test_h_functional_of_constant_is_zero(constant_state):
    assert diagnostics.h_functional(constant_state) == 0.0
    assert np.all(diagnostics.h_field(constant_state).values == 0.0)


def test_symmetry_defect(rosenau, grid2d, grid64):
    assert diagnostics.symmetry_defect(closed_forms.sample_state(rosenau, grid64, -1.0)) == 0.0
    axisymmetric = closed_forms.sample_state(rosenau, grid2d, -1.0)
    assert diagnostics.symmetry_defect(axisymmetric) == pytest.approx(0.0, abs=1e-12)
    perturbation = Perturbation(amplitude=0.05, theta_mode=1, psi_power=2, target=EvolveVariable.U)
    perturbed = initial_state_from_closed_form(rosenau, grid2d, -1.0, perturbation)
    assert diagnostics.symmetry_defect(perturbed) > 1e-3


def test_harnack_rate_on_closed_form(rosenau, grid128):
    earlier = closed_forms.sample_state(rosenau, grid128, -1.0)
    later = closed_forms.sample_state(rosenau, grid128, -0.99)
    assert diagnostics.harnack_rate(earlier, later) >= -1e-8
    with pytest.raises(GridError):
        diagnostics.harnack_rate(later, earlier)
    with pytest.raises(GridError):
        diagnostics.harnack_rate(earlier, closed_forms.sample_state(rosenau, build_grid(64, 1), -0.99))


def test_shi_monitor(constant_state, rosenau, grid64):
    assert diagnostics.shi_monitor(constant_state) == 0.0
    assert diagnostics.shi_monitor(closed_forms.sample_state(rosenau, grid64, -1.0)) > 0.0


def test_bound_report_of_constant_state(constant_state):
    report = bound_report(constant_state)
    assert report.t == -1.0
    assert report.lemma1_sup == report.cor4_sup == report.cor5_sup == 0.0
    assert report.h_sup == report.h_functional == report.cond6_const == 0.0
    assert report.r_min == pytest.approx(1.0) and report.r_max == pytest.approx(1.0)
    assert report.area == pytest.approx(8 * np.pi, rel=5e-3)
    assert report.is_finite()
    assert not report.h_is_slice_extension


def test_bound_report_cor5_matches_closed_value(rosenau, grid128):
    state = closed_forms.sample_state(rosenau, grid128, -1.0)
    _, b, _, _ = closed_forms.coefficients(rosenau, -1.0)
    expected = 16 * abs(b) / (3 * math.sqrt(3))
    assert bound_report(state).cor5_sup == pytest.approx(expected, rel=1e-2)


def test_bound_report_on_two_dimensional_state(rosenau, grid2d):
    perturbation = Perturbation(amplitude=0.05, theta_mode=1, psi_power=2, target=EvolveVariable.U)
    state = initial_state_from_closed_form(rosenau, grid2d, -1.0, perturbation)
    report = bound_report(state)
    assert report.h_is_slice_extension
    assert report.cond6_const > 0.0
    assert report.symmetry_defect > 0.0
    axisymmetric = bound_report(closed_forms.sample_state(rosenau, grid2d, -1.0))
    assert axisymmetric.cond6_const == pytest.approx(0.0, abs=1e-20)


def test_lemma7_profile_moves_to_poles(rosenau, grid128):
    state = closed_forms.sample_state(rosenau, grid128, -1.0)
    profile = diagnostics.lemma7_profile(state)
    assert len(profile) == 4
    psi0 = [item[0] for item in profile]
    assert psi0 == sorted(psi0)
    assert all(value >= 0 for _, value in profile)


def test_lemma1_envelope_bounds_report(rosenau, grid128):
    state = closed_forms.sample_state(rosenau, grid128, -1.0)
    envelope = diagnostics.lemma1_envelope(rosenau, -1.0, grid128)
    assert envelope >= 4 * rosenau.mu
    assert bound_report(state).lemma1_sup <= envelope * 1.1


def test_bound_monitor_collects_reports(constant_state):
    monitor = BoundMonitor()
    later = FlowState(t=-0.5, v=constant_state.v.with_values(np.full(constant_state.grid.shape, 1.0)))
    monitor(0, constant_state)
    monitor(10, later)
    frame = monitor.dataframe()
    assert list(frame.columns) == list(CSV_COLUMNS)
    assert len(frame) == 2
    assert monitor.max_drift("area") == pytest.approx(-8 * np.pi, rel=5e-3)
    assert monitor.max_drift("h_functional") == 0.0
    assert BoundMonitor().max_drift("area") == 0.0


def test_f_field_is_laplacian(rosenau, grid64):
    state = closed_forms.sample_state(rosenau, grid64, -1.0)
    expected = 2.0 * closed_forms.coefficients(rosenau, -1.0)[1] * (1.0 - 3.0 * np.sin(grid64.psi_column) ** 2)
    assert np.max(np.abs(diagnostics.f_field(state).values - expected)) < 1e-2
