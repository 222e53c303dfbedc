"""
공형 리치 흐름 시간 적분기

    u_t = Delta log u - 2                      (u 형식)
    v_t = v Delta v - |grad v|^2 + 2 v^2       (v = 1/u 형식, 기본 적분 변수)

고전 4단 Runge-Kutta, CFL 조건 dt ~ h^2 / v. 시간은 항상 t < 0 에서 앞으로만 진행한다.
"""

import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ancientflow.exceptions import FieldError, GridError, PositivityLost, SolverError, TimeCrossedZero
from ancientflow.models.flow_models import (
    ClosedFormSolution,
    EvolveVariable,
    FlowState,
    LatLonGrid,
    Perturbation,
    ScalarField,
    SolverConfig,
)
from ancientflow.services import closed_forms
from ancientflow.services.sphere_core import integrate_sphere, laplacian_and_grad_sq
from ancientflow.utils.logger import get_logger, log_performance

Observer = Callable[[int, FlowState], object]
PairObserver = Callable[[int, FlowState, FlowState], object]
ObservationLog = List[Tuple[float, Dict[str, object]]]

# 시간 일치 판정 허용치
TIME_MATCH_TOLERANCE = 1e-12


def _rhs_v_values(values: np.ndarray, grid: LatLonGrid) -> np.ndarray:
    laplacian, grad_sq = laplacian_and_grad_sq(values, grid)
    return values * laplacian - grad_sq + 2.0 * values ** 2


def _rhs_u_values(values: np.ndarray, grid: LatLonGrid) -> np.ndarray:
    return laplacian_and_grad_sq(np.log(values), grid)[0] - 2.0


def rhs_v(state: FlowState) -> ScalarField:
    """v_t = v Delta v - |grad v|^2 + 2 v^2"""
    return state.v.with_values(_rhs_v_values(state.v.values, state.grid))


def rhs_u(u: ScalarField) -> ScalarField:
    """u_t = Delta log u - 2 (v 형식의 교차 검증용)"""
    if not u.min() > 0:
        raise FieldError(f"u는 양수여야 합니다 - min u={u.min()}")
    return u.with_values(_rhs_u_values(u.values, u.grid))


def stable_dt(state: FlowState, config: SolverConfig) -> float:
    """dt = cfl * h_eff^2 / (4 max v), dt_max 와 (-t)/10 으로 상한"""
    dt = config.cfl_safety * state.grid.h_eff_sq / (4.0 * state.v.max())
    return float(min(dt, config.dt_max, -state.t / 10.0))


def _check_stage(values: np.ndarray, t: float):
    # NaN 이면 min 도 NaN 이라 여기서 걸린다
    v_min = float(values.min())
    if not v_min > 0:
        raise PositivityLost(t, v_min)


def _check_positive(values: np.ndarray, t: float):
    if not np.all(np.isfinite(values)):
        raise PositivityLost(t, float("nan"))
    _check_stage(values, t)


def _rk4(values: np.ndarray, t: float, dt: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """단계 값은 배열로만 다루고 양수성만 확인; 완전한 검사는 확정된 상태에서"""
    k1 = rhs(values)
    stage = values + 0.5 * dt * k1
    _check_stage(stage, t + 0.5 * dt)
    k2 = rhs(stage)
    stage = values + 0.5 * dt * k2
    _check_stage(stage, t + 0.5 * dt)
    k3 = rhs(stage)
    stage = values + dt * k3
    _check_stage(stage, t + dt)
    k4 = rhs(stage)
    return values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state: FlowState, dt: float, config: SolverConfig) -> FlowState:
    """고전 RK4 한 스텝, 결과의 양수성 검사"""
    if dt < 0:
        raise SolverError(f"역방향 시간 적분은 지원하지 않습니다 - dt={dt}")
    if dt == 0:
        return state
    if state.t + dt >= 0:
        raise TimeCrossedZero(state.t, dt)

    grid = state.grid
    if config.evolve_variable == EvolveVariable.U:
        new_u = _rk4(1.0 / state.v.values, state.t, dt, lambda values: _rhs_u_values(values, grid))
        _check_positive(new_u, state.t + dt)
        new_values = 1.0 / new_u
    else:
        new_values = _rk4(state.v.values, state.t, dt, lambda values: _rhs_v_values(values, grid))
    _check_positive(new_values, state.t + dt)
    return FlowState(t=state.t + dt, v=ScalarField(grid, new_values))


def area(state: FlowState) -> float:
    """g = u ds_p^2 의 면적 = int 1/v dV"""
    return integrate_sphere(state.u)


def fit_area_slope(times: Sequence[float], areas: Sequence[float]) -> float:
    """면적-시간 최소제곱 기울기 (이론값 -8 pi)"""
    if len(times) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.asarray(times, dtype=float), np.asarray(areas, dtype=float), 1)
    return float(slope)


def l1_rotation_distance(state_a: FlowState, state_b: FlowState) -> float:
    """int |u_a - u_b| dV"""
    if not state_a.grid.same_as(state_b.grid):
        raise GridError("L1 거리는 같은 격자의 상태끼리만 계산할 수 있습니다")
    if abs(state_a.t - state_b.t) > TIME_MATCH_TOLERANCE:
        raise SolverError(f"L1 거리는 같은 시각의 상태끼리만 계산할 수 있습니다 - {state_a.t} vs {state_b.t}")
    diff = np.abs(1.0 / state_a.v.values - 1.0 / state_b.v.values)
    return integrate_sphere(state_a.v.with_values(diff))


def initial_state_from_closed_form(
    sol: ClosedFormSolution,
    grid: LatLonGrid,
    t: float,
    perturbation: Optional[Perturbation] = None,
) -> FlowState:
    """닫힌 형태 해를 격자에 표본화하고 필요하면 섭동을 더한 초기 상태"""
    base = closed_forms.sample_field(sol, grid, t)
    if perturbation is None:
        return FlowState(t=float(t), v=base)
    psi, theta = np.meshgrid(grid.psi_nodes, grid.theta_nodes, indexing="ij")
    values = perturbation.apply(base.values, psi, theta)
    return FlowState(t=float(t), v=base.with_values(values))


def _observer_name(observer: Callable) -> str:
    return str(getattr(observer, "name", None) or getattr(observer, "__name__", None) or type(observer).__name__)


class FlowSolver:
    """RK4 기반 흐름 적분 서비스"""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.logger = get_logger("flow_solver")

    def stable_dt(self, state: FlowState) -> float:
        return stable_dt(state, self.config)

    def step(self, state: FlowState, dt: float) -> FlowState:
        return step(state, dt, self.config)

    def _check_target(self, t: float, t_end: float):
        if t_end >= 0:
            raise TimeCrossedZero(t, t_end - t)
        if t_end < t:
            raise SolverError(f"목표 시각이 현재 시각보다 이릅니다 - t={t}, t_end={t_end}")

    def evolve(
        self,
        state: FlowState,
        t_end: float,
        observers: Sequence[Observer] = (),
        cadence: int = 1,
    ) -> Tuple[FlowState, ObservationLog]:
        """t_end 까지 적분; 초기, cadence 스텝마다, 최종 상태에서 관측 함수 호출"""
        self._check_target(state.t, t_end)
        cadence = max(int(cadence), 1)
        log: ObservationLog = []

        def observe(step_index: int, current: FlowState):
            values = {_observer_name(obs): obs(step_index, current) for obs in observers}
            log.append((current.t, values))

        start = time.time()
        observe(0, state)
        steps = 0
        while state.t < t_end:
            dt = self.stable_dt(state)
            last = state.t + dt >= t_end
            if last:
                dt = t_end - state.t
            state = self.step(state, dt)
            if last:
                # 마지막 관측은 정확히 t_end
                state = FlowState(t=float(t_end), v=state.v)
            steps += 1
            if last or steps % cadence == 0:
                observe(steps, state)

        log_performance("evolve", time.time() - start, steps=steps, t_end=t_end, grid=state.grid.shape)
        return state, log

    def evolve_pair(
        self,
        state_a: FlowState,
        state_b: FlowState,
        t_end: float,
        observers: Sequence[PairObserver] = (),
        cadence: int = 1,
    ) -> Tuple[FlowState, FlowState, ObservationLog]:
        """두 상태를 같은 시간 간격으로 함께 적분 (회전 축약 실험용)"""
        if not state_a.grid.same_as(state_b.grid):
            raise GridError("함께 적분할 상태의 격자가 다릅니다")
        if abs(state_a.t - state_b.t) > TIME_MATCH_TOLERANCE:
            raise SolverError("함께 적분할 상태의 시각이 다릅니다")
        self._check_target(state_a.t, t_end)
        cadence = max(int(cadence), 1)
        log: ObservationLog = []

        def observe(step_index: int, a: FlowState, b: FlowState):
            values = {_observer_name(obs): obs(step_index, a, b) for obs in observers}
            log.append((a.t, values))

        start = time.time()
        observe(0, state_a, state_b)
        steps = 0
        while state_a.t < t_end:
            dt = min(self.stable_dt(state_a), self.stable_dt(state_b))
            last = state_a.t + dt >= t_end
            if last:
                dt = t_end - state_a.t
            state_a = self.step(state_a, dt)
            state_b = self.step(state_b, dt)
            if last:
                state_a = FlowState(t=float(t_end), v=state_a.v)
                state_b = FlowState(t=float(t_end), v=state_b.v)
            steps += 1
            if last or steps % cadence == 0:
                observe(steps, state_a, state_b)

        log_performance("evolve_pair", time.time() - start, steps=steps, t_end=t_end)
        return state_a, state_b, log
