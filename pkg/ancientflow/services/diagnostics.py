"""
흐름 상태에서 계산하는 파생량과 선험적 경계량 모니터

모든 sup 값은 격자 노드 최대값이다(보간 없음). 2차원 상태에서 Q_x, H 는
theta 단면마다 계산한 확장 진단값이다.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ancientflow.config import CSV_COLUMNS
from ancientflow.exceptions import GridError
from ancientflow.models.flow_models import ClosedFormSolution, FlowState, LatLonGrid, MonitorConfig, ScalarField
from ancientflow.models.report_models import BoundReport
from ancientflow.services import closed_forms
from ancientflow.services.sphere_core import (
    grad_sq_sphere,
    integrate_sphere,
    laplace_beltrami,
    partial_psi,
    partial_theta,
)
from ancientflow.utils.logger import get_logger, log_bound_report

# eq67 부등식의 상수
EQ67_CONSTANT = 18.0


def _trig(grid: LatLonGrid) -> Tuple[np.ndarray, np.ndarray]:
    psi = grid.psi_column
    return np.cos(psi), np.sin(psi)


def f_field(state: FlowState) -> ScalarField:
    """f = Delta v"""
    return laplace_beltrami(state.v)


def scalar_curvature(state: FlowState) -> ScalarField:
    """R = v_t / v = Delta v - |grad v|^2 / v + 2 v"""
    v = state.v.values
    values = f_field(state).values - grad_sq_sphere(state.v).values / v + 2.0 * v
    return state.v.with_values(values)


def identity_check(state: FlowState) -> float:
    """max |Delta v - (R + |grad v|^2 / v - 2 v)| (배선 검사)"""
    v = state.v.values
    rebuilt = scalar_curvature(state).values + grad_sq_sphere(state.v).values / v - 2.0 * v
    return float(np.max(np.abs(f_field(state).values - rebuilt)))


def qx_components(state: FlowState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(cos v_psi, sec v_psi + sin v_psipsi, cos v_psipsipsi); Q_x = -2a + 3b + c"""
    cos, sin = _trig(state.grid)
    v_psi = partial_psi(state.v, 1).values
    v_psipsi = partial_psi(state.v, 2).values
    v_psipsipsi = partial_psi(state.v, 3).values
    return cos * v_psi, v_psi / cos + sin * v_psipsi, cos * v_psipsipsi


def qx_field(state: FlowState) -> ScalarField:
    """Q_x = -2 cos(psi) v_psi + 3 (sec(psi) v_psi + sin(psi) v_psipsi) + cos(psi) v_psipsipsi"""
    a, b, c = qx_components(state)
    return state.v.with_values(-2.0 * a + 3.0 * b + c)


def qx_psi_field(state: FlowState) -> ScalarField:
    """Q_x 의 psi 미분 (해석적으로 전개한 식)"""
    cos, sin = _trig(state.grid)
    sec = 1.0 / cos
    v_psi = partial_psi(state.v, 1).values
    v_psipsi = partial_psi(state.v, 2).values
    v_psipsipsi = partial_psi(state.v, 3).values
    v_psi4 = partial_psi(state.v, 4).values
    values = (
        2.0 * sin * v_psi
        - 2.0 * cos * v_psipsi
        + 3.0 * (sec * (sin / cos) * v_psi + sec * v_psipsi + cos * v_psipsi)
        + 2.0 * sin * v_psipsipsi
        + cos * v_psi4
    )
    return state.v.with_values(values)


def h_field(state: FlowState) -> ScalarField:
    """H = Q_x^2"""
    return state.v.with_values(qx_field(state).values ** 2)


def h_functional(state: FlowState) -> float:
    """int H / v dV"""
    return integrate_sphere(state.v.with_values(h_field(state).values / state.v.values))


def symmetry_defect(state: FlowState) -> float:
    """sup |u - u_bar(psi)|, u_bar 는 theta 평균"""
    if state.grid.is_axisymmetric:
        return 0.0
    u = 1.0 / state.v.values
    return float(np.max(np.abs(u - u.mean(axis=1, keepdims=True))))


def harnack_rate(state_a: FlowState, state_b: FlowState) -> float:
    """min (R(t+dt) - R(t)) / dt"""
    if not state_a.grid.same_as(state_b.grid):
        raise GridError("하르낙 비율은 같은 격자의 상태끼리만 계산할 수 있습니다")
    dt = state_b.t - state_a.t
    if not dt > 0:
        raise GridError(f"두 번째 상태가 더 늦은 시각이어야 합니다 - dt={dt}")
    r_a = scalar_curvature(state_a).values
    r_b = scalar_curvature(state_b).values
    return float(np.min((r_b - r_a) / dt))


def shi_monitor(state: FlowState) -> float:
    """sup |cos(psi) R_psi| (기록만 하고 판정하지 않음)"""
    cos, _ = _trig(state.grid)
    r_psi = partial_psi(scalar_curvature(state), 1).values
    return float(np.max(np.abs(cos * r_psi)))


def eq67_pointwise_check(state: FlowState) -> Tuple[bool, float]:
    """H <= 18 [cos^2 v_psi^2 + (sec v_psi + sin v_psipsi)^2 + cos^2 v_psipsipsi^2] 노드별 검사"""
    a, b, c = qx_components(state)
    h = (-2.0 * a + 3.0 * b + c) ** 2
    bound = EQ67_CONSTANT * (a ** 2 + b ** 2 + c ** 2)
    violation = float(np.max(np.maximum(h - bound, 0.0)))
    return violation == 0.0, violation


def outer_band_h_max(state: FlowState, fraction: float = 0.1) -> float:
    """|psi| >= (1 - fraction) pi/2 띠에서의 max H"""
    psi0 = (1.0 - fraction) * np.pi / 2
    mask = np.abs(state.grid.psi_nodes) >= psi0
    if not np.any(mask):
        return 0.0
    return float(np.max(h_field(state).values[mask]))


def lemma7_profile(state: FlowState, fractions: Sequence[float] = (0.5, 0.25, 0.1, 0.05)) -> List[Tuple[float, float]]:
    """psi0 를 극 쪽으로 옮겨가며 |psi| >= psi0 의 max H"""
    return [((1.0 - fraction) * np.pi / 2, outer_band_h_max(state, fraction)) for fraction in fractions]


def lemma1_envelope(sol: ClosedFormSolution, t: float, grid: LatLonGrid) -> float:
    """4 mu + sup (B^2 sin^2 2psi / v) (Rosenau 의 lemma1 상한)"""
    _, b, _, _ = closed_forms.coefficients(sol, t)
    psi = grid.psi_nodes
    v = closed_forms.eval_v(sol, psi, t)
    return float(4.0 * sol.mu + np.max(b ** 2 * np.sin(2.0 * psi) ** 2 / v))


def bound_report(state: FlowState, config: Optional[MonitorConfig] = None) -> BoundReport:
    """한 시각의 모든 경계량"""
    config = config or MonitorConfig()
    grid = state.grid
    cos, _ = _trig(grid)
    v = state.v.values

    f = f_field(state).values
    grad_sq = grad_sq_sphere(state.v).values
    v_psi = partial_psi(state.v, 1).values
    v_psipsi = partial_psi(state.v, 2).values
    v_psipsipsi = partial_psi(state.v, 3).values
    r = f - grad_sq / v + 2.0 * v
    qx = qx_field(state).values
    qx_psi = qx_psi_field(state).values

    if grid.is_axisymmetric:
        cond6 = 0.0
    else:
        v_theta = partial_theta(state.v, 1).values
        cond6 = float(np.max(v_theta ** 2 / (v ** (1.0 + config.a_exponent) * cos ** 2)))

    report = BoundReport(
        t=float(state.t),
        lemma1_sup=float(np.max(np.abs(f) + grad_sq / v)),
        cor4_sup=float(np.max(np.abs(v_psipsi) + np.abs(v_psi / cos))),
        cor5_sup=float(np.max(np.abs(cos * v_psipsipsi))),
        h_sup=float(np.max(qx ** 2)),
        h_psi_sup=float(np.max(2.0 * np.abs(qx) * np.abs(qx_psi))),
        cond6_const=cond6,
        cond62_sup=float(np.max(cos ** (1.0 - config.alpha_exponent) * np.abs(v_psipsipsi))),
        holder41_const=float(np.max(np.abs(partial_psi(state.v.with_values(f), 1).values))),
        r_min=float(np.min(r)),
        r_max=float(np.max(r)),
        h_functional=h_functional(state),
        area=integrate_sphere(state.u),
        symmetry_defect=symmetry_defect(state),
        h_is_slice_extension=not grid.is_axisymmetric,
    )
    return report


class BoundMonitor:
    """evolve 관측 함수: 호출될 때마다 BoundReport 를 쌓는다"""

    name = "bound_report"

    def __init__(self, config: Optional[MonitorConfig] = None):
        self.config = config or MonitorConfig()
        self.reports: List[BoundReport] = []
        self.logger = get_logger("diagnostics")

    def __call__(self, step_index: int, state: FlowState) -> BoundReport:
        report = bound_report(state, self.config)
        if not report.is_finite():
            self.logger.warning(f"유한하지 않은 경계량 - step={step_index}, t={state.t:.6g}")
        log_bound_report(report)
        self.reports.append(report)
        return report

    def dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([report.to_dict() for report in self.reports], columns=CSV_COLUMNS)

    def max_drift(self, column: str) -> float:
        """연속 관측 사이 column 값 증가량의 최대값 (단위 시간당)"""
        frame = self.dataframe()
        if len(frame) < 2:
            return 0.0
        rates = frame[column].diff().iloc[1:] / frame['t'].diff().iloc[1:]
        return float(rates.max())
