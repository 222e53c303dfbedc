"""
닫힌 형태 해 (Rosenau 해, 수축 구면)와 해석적 도함수

모든 도함수는 손으로 유도한 해석식이며 차분을 쓰지 않는다.
Rosenau 해:

    v = A(t) + B(t) sin^2 psi,  A = -mu coth(2 mu t),  B = mu tanh(2 mu t)
    A' = 2 mu^2 / sinh^2(2 mu t),  B' = 2 mu^2 / cosh^2(2 mu t)

수축 구면: v = 1 / (2 (-t)).
"""

from typing import Tuple, Union

import numpy as np
from scipy import integrate

from ancientflow.config import ACCEPTANCE_TOLERANCES, CAP_RESOLUTION_FACTOR
from ancientflow.exceptions import ClosedFormError
from ancientflow.models.flow_models import ClosedFormSolution, FlowState, LatLonGrid, ScalarField, SolutionKind
from ancientflow.utils.logger import get_logger

ArrayLike = Union[float, np.ndarray]

_logger = get_logger("closed_forms")


def _check_time(t: ArrayLike):
    if np.any(np.asarray(t) >= 0):
        raise ClosedFormError(f"닫힌 형태 해는 t < 0 에서만 정의됩니다 - t={t}")


def _check_latitude(psi: ArrayLike, open_interval: bool = False):
    bound = np.abs(np.asarray(psi))
    if open_interval and np.any(bound >= np.pi / 2):
        raise ClosedFormError("|psi| < pi/2 이어야 합니다")
    if np.any(bound > np.pi / 2 + 1e-15):
        raise ClosedFormError("|psi| <= pi/2 이어야 합니다")


def coefficients(sol: ClosedFormSolution, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike, ArrayLike]:
    """v = A + B sin^2 psi 의 계수 (A, B, A', B')"""
    _check_time(t)
    t = np.asarray(t, dtype=float)
    if sol.kind == SolutionKind.CONTRACTING_SPHERE:
        a = 1.0 / (2.0 * (-t))
        return a, np.zeros_like(a), 1.0 / (2.0 * t ** 2), np.zeros_like(a)
    mu = sol.mu
    s = 2.0 * mu * t
    a = -mu / np.tanh(s)
    b = mu * np.tanh(s)
    a_t = 2.0 * mu ** 2 / np.sinh(s) ** 2
    b_t = 2.0 * mu ** 2 / np.cosh(s) ** 2
    return a, b, a_t, b_t


def pole_value(sol: ClosedFormSolution, t: ArrayLike) -> ArrayLike:
    """극에서의 값 A + B = 2 mu / sinh(4 mu |t|) (상쇄 없이 계산)"""
    _check_time(t)
    t = np.asarray(t, dtype=float)
    if sol.kind == SolutionKind.CONTRACTING_SPHERE:
        return 1.0 / (2.0 * (-t))
    return 2.0 * sol.mu / np.sinh(4.0 * sol.mu * (-t))


def _profile(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    # v = (A + B) - B cos^2 psi
    _, b, _, _ = coefficients(sol, t)
    return pole_value(sol, t) - b * np.cos(psi) ** 2


def eval_v(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    """v(psi, t) (theta 무관)"""
    _check_latitude(psi)
    return _profile(sol, psi, t)


def eval_u(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    return 1.0 / eval_v(sol, psi, t)


def eval_v_derivatives(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike):
    """(v_t, v_psi, v_psipsi, v_psipsipsi)"""
    _check_latitude(psi)
    a, b, a_t, b_t = coefficients(sol, t)
    sin_sq = np.sin(psi) ** 2
    v_t = a_t + b_t * sin_sq
    v_psi = b * np.sin(2.0 * psi)
    v_psipsi = 2.0 * b * np.cos(2.0 * psi)
    v_psipsipsi = -4.0 * b * np.sin(2.0 * psi)
    return v_t, v_psi, v_psipsi, v_psipsipsi


def eval_u_t(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    """u_t = -v_t / v^2"""
    v = eval_v(sol, psi, t)
    v_t = eval_v_derivatives(sol, psi, t)[0]
    return -v_t / v ** 2


def pde_residual(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    """v_t - (v Delta v - |grad v|^2 + 2 v^2), 모든 항 해석적

    Delta v = 2B(1 - 3 sin^2 psi), |grad v|^2 = B^2 sin^2(2 psi) 는 극에서도 유한하다.
    """
    _check_latitude(psi)
    _, b, a_t, b_t = coefficients(sol, t)
    sin_sq = np.sin(psi) ** 2
    v = _profile(sol, psi, t)
    v_t = a_t + b_t * sin_sq
    laplacian = 2.0 * b * (1.0 - 3.0 * sin_sq)
    grad_sq = b ** 2 * np.sin(2.0 * psi) ** 2
    return v_t - (v * laplacian - grad_sq + 2.0 * v ** 2)


def eval_scalar_curvature(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    """R = v_t / v"""
    return eval_v_derivatives(sol, psi, t)[0] / eval_v(sol, psi, t)


def eval_R_t(sol: ClosedFormSolution, psi: ArrayLike, t: float, dt: float = 1e-5) -> ArrayLike:
    """해석적 R 의 t 중심 차분 (하르낙 방향 기준값)"""
    _check_time(t + dt)
    return (eval_scalar_curvature(sol, psi, t + dt) - eval_scalar_curvature(sol, psi, t - dt)) / (2.0 * dt)


def limit_profile(psi: ArrayLike, c0: float) -> ArrayLike:
    """t -> -inf 극한 C0 cos^2 psi"""
    if not c0 > 0:
        raise ClosedFormError(f"c0는 양수여야 합니다 - c0={c0}")
    return c0 * np.cos(psi) ** 2


def limit_gap(sol: ClosedFormSolution, t: float) -> float:
    """sup_psi |v - c0 cos^2 psi| = 2 mu / sinh(4 mu |t|) (Rosenau)"""
    return float(pole_value(sol, t))


def cap_scale(sol: ClosedFormSolution, t: float) -> float:
    """극 주변 캡의 각 폭 sqrt((A + B) / |B|) = 1 / sinh(2 mu |t|); 수축 구면은 무한대"""
    if sol.kind == SolutionKind.CONTRACTING_SPHERE:
        return float("inf")
    _, b, _, _ = coefficients(sol, t)
    return float(np.sqrt(pole_value(sol, t) / abs(b)))


def cap_resolution_time(sol: ClosedFormSolution, h_psi: float, factor: float = CAP_RESOLUTION_FACTOR) -> float:
    """cap_scale(t) >= factor * h_psi 가 되는 가장 이른 시각 (수축 구면은 -inf)"""
    if not h_psi > 0 or not factor > 0:
        raise ClosedFormError(f"h_psi 와 factor 는 양수여야 합니다 - h_psi={h_psi}, factor={factor}")
    if sol.kind == SolutionKind.CONTRACTING_SPHERE:
        return float("-inf")
    return float(-np.arcsinh(1.0 / (factor * h_psi)) / (2.0 * sol.mu))


def qx_from_derivatives(psi: ArrayLike, v_psi: ArrayLike, v_psipsi: ArrayLike, v_psipsipsi: ArrayLike) -> ArrayLike:
    """Q_x = -2 cos(psi) v_psi + 3 (sec(psi) v_psi + sin(psi) v_psipsi) + cos(psi) v_psipsipsi"""
    cos = np.cos(psi)
    return -2.0 * cos * v_psi + 3.0 * (v_psi / cos + np.sin(psi) * v_psipsi) + cos * v_psipsipsi


def closed_form_Qx(sol: ClosedFormSolution, psi: ArrayLike, t: ArrayLike) -> ArrayLike:
    """해석적 도함수로 계산한 Q_x (두 닫힌 해 모두 0)"""
    _check_latitude(psi, open_interval=True)
    _, v_psi, v_psipsi, v_psipsipsi = eval_v_derivatives(sol, psi, t)
    return qx_from_derivatives(psi, v_psi, v_psipsi, v_psipsipsi)


def area_by_quadrature(sol: ClosedFormSolution, t: float) -> float:
    """2 pi * int cos(psi) / v dpsi 를 y = 1 - sin(psi) 치환 후 적응 구적

    v = (A+B) + |B| y (2 - y). 극 쪽 봉우리 폭이 (A+B)/|B| 이므로 그 폭부터
    10 배씩 늘어나는 구간으로 나눈다.
    """
    _check_time(t)
    gap = float(pole_value(sol, t))
    b = abs(float(coefficients(sol, t)[1]))
    edges = [0.0]
    if b > 0:
        width = gap / b
        while width < 1.0:
            edges.append(width)
            width *= 10.0
    edges.append(1.0)
    value = 0.0
    for lower, upper in zip(edges[:-1], edges[1:]):
        piece, _ = integrate.quad(
            lambda y: 1.0 / (gap + b * y * (2.0 - y)),
            lower,
            upper,
            epsabs=0.0,
            epsrel=1e-12,
            limit=200,
        )
        value += piece
    return 4.0 * np.pi * value


def verified_area(sol: ClosedFormSolution, t: float) -> float:
    """면적 8 pi |t| (두 닫힌 해 공통), 해 자신의 직접 구적으로 자체 검증"""
    _check_time(t)
    exact = 8.0 * np.pi * abs(t)
    quadrature = area_by_quadrature(sol, t)
    relative = abs(quadrature - exact) / exact
    if relative > ACCEPTANCE_TOLERANCES['area_quadrature_rel']:
        _logger.error(f"면적 자체 검증 실패 - 해: {sol.kind.value}, mu={sol.mu}, t={t}, "
                      f"정확값={exact:.12g}, 구적={quadrature:.12g}")
        raise ClosedFormError(f"면적 구적 불일치 - 상대오차 {relative:.3g}")
    return exact


def rosenau_area(mu: float, t: float) -> float:
    return verified_area(ClosedFormSolution.rosenau(mu), t)


def sample_field(sol: ClosedFormSolution, grid: LatLonGrid, t: float) -> ScalarField:
    """격자 위의 v 필드"""
    return ScalarField.from_profile(grid, lambda psi: eval_v(sol, psi, t))


def sample_state(sol: ClosedFormSolution, grid: LatLonGrid, t: float) -> FlowState:
    return FlowState(t=float(t), v=sample_field(sol, grid, t))
