"""
구면 좌표 격자, 미분 연산자, 구적법 및 메르카토르 좌표 변환

좌표는 위도 psi in (-pi/2, pi/2), 경도 theta in [0, 2pi).
둥근 계량 ds^2 = dpsi^2 + cos^2(psi) dtheta^2 에서

    Delta f = f_psipsi - tan(psi) f_psi + sec^2(psi) f_thetatheta
    |grad f|^2 = f_psi^2 + sec^2(psi) f_theta^2

극점 위에는 노드를 두지 않고(엇갈린 위도), 극을 넘어가는 유령 행은
f(-pi/2 - d, theta) = f(-pi/2 + d, theta + pi) 반사로 채운다.
"""

from typing import Tuple, Union

import numpy as np

from ancientflow.config import GRID_LIMITS
from ancientflow.exceptions import FieldError, GridError
from ancientflow.models.flow_models import LatLonGrid, ScalarField

ArrayLike = Union[float, np.ndarray]


def build_grid(n_psi: int, n_theta: int) -> LatLonGrid:
    """엇갈린 위도 격자 생성"""
    if int(n_psi) != n_psi or n_psi < GRID_LIMITS['min_n_psi']:
        raise GridError(f"n_psi는 {GRID_LIMITS['min_n_psi']} 이상의 정수여야 합니다 - n_psi={n_psi}")
    if int(n_theta) != n_theta or n_theta < 1:
        raise GridError(f"n_theta는 양의 정수여야 합니다 - n_theta={n_theta}")
    if n_theta != 1 and (n_theta % 2 != 0 or n_theta < GRID_LIMITS['min_n_theta']):
        # 극 반사 theta -> theta + pi 가 정확한 인덱스 이동이 되려면 짝수여야 함
        raise GridError(f"n_theta는 1 또는 {GRID_LIMITS['min_n_theta']} 이상의 짝수여야 합니다 - n_theta={n_theta}")

    n_psi, n_theta = int(n_psi), int(n_theta)
    h_psi = np.pi / n_psi
    h_theta = 2.0 * np.pi / n_theta
    psi_nodes = -np.pi / 2 + (np.arange(n_psi) + 0.5) * h_psi
    theta_nodes = np.arange(n_theta) * h_theta
    psi_nodes.setflags(write=False)
    theta_nodes.setflags(write=False)
    return LatLonGrid(
        n_psi=n_psi,
        n_theta=n_theta,
        psi_nodes=psi_nodes,
        theta_nodes=theta_nodes,
        h_psi=h_psi,
        h_theta=h_theta,
    )


def _pad_poles(values: np.ndarray, width: int) -> np.ndarray:
    """극 너머 유령 행 추가: 행 -1-k <- 행 k (theta + pi), 행 n+k <- 행 n-1-k (theta + pi)"""
    south = values[:width][::-1]
    north = values[-width:][::-1]
    n_theta = values.shape[1]
    if n_theta > 1:
        south = np.roll(south, n_theta // 2, axis=1)
        north = np.roll(north, n_theta // 2, axis=1)
    return np.concatenate([south, values, north], axis=0)


def _psi_first_second(values: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """유령 행 한 번으로 (d/dpsi, d^2/dpsi^2)"""
    p = _pad_poles(values, 1)
    return (p[2:] - p[:-2]) / (2.0 * h), (p[2:] - 2.0 * p[1:-1] + p[:-2]) / h ** 2


def _psi_derivative(values: np.ndarray, h: float, order: int) -> np.ndarray:
    if order in (1, 2):
        return _psi_first_second(values, h)[order - 1]
    if order == 3:
        p = _pad_poles(values, 2)
        return (p[4:] - 2.0 * p[3:-1] + 2.0 * p[1:-3] - p[:-4]) / (2.0 * h ** 3)
    if order == 4:
        p = _pad_poles(values, 2)
        return (p[4:] - 4.0 * p[3:-1] + 6.0 * p[2:-2] - 4.0 * p[1:-3] + p[:-4]) / h ** 4
    raise ValueError(f"지원하지 않는 미분 차수: {order}")


def _theta_first_second(values: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    if values.shape[1] == 1:
        zeros = np.zeros_like(values)
        return zeros, zeros
    forward = np.roll(values, -1, axis=1)
    backward = np.roll(values, 1, axis=1)
    return (forward - backward) / (2.0 * h), (forward - 2.0 * values + backward) / h ** 2


def _theta_derivative(values: np.ndarray, h: float, order: int) -> np.ndarray:
    return _theta_first_second(values, h)[order - 1]


def laplacian_and_grad_sq(values: np.ndarray, grid: LatLonGrid) -> Tuple[np.ndarray, np.ndarray]:
    """배열 단위 (Delta f, |grad f|^2)

    필드 객체를 만들지 않는 적분기 내부 경로. 공개 연산자도 같은 계산을 쓴다.
    """
    f_psi, f_psipsi = _psi_first_second(values, grid.h_psi)
    laplacian = f_psipsi - grid.tan_column * f_psi
    grad_sq = f_psi ** 2
    if not grid.is_axisymmetric:
        f_theta, f_thetatheta = _theta_first_second(values, grid.h_theta)
        laplacian = laplacian + f_thetatheta * grid.sec_sq_column
        grad_sq = grad_sq + f_theta ** 2 * grid.sec_sq_column
    return laplacian, grad_sq


def partial_psi(field: ScalarField, order: int = 1) -> ScalarField:
    """중심 차분 d^k/dpsi^k (k = 1..4), 2차 정확도"""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"order는 1, 2, 3, 4 중 하나여야 합니다 - order={order}")
    return field.with_values(_psi_derivative(field.values, field.grid.h_psi, order))


def partial_theta(field: ScalarField, order: int = 1) -> ScalarField:
    """주기적 중심 차분 d^k/dtheta^k (k = 1, 2); 축대칭이면 0"""
    if order not in (1, 2):
        raise ValueError(f"order는 1 또는 2여야 합니다 - order={order}")
    return field.with_values(_theta_derivative(field.values, field.grid.h_theta, order))


def laplace_beltrami(field: ScalarField) -> ScalarField:
    """둥근 구면의 라플라스-벨트라미 연산자"""
    return field.with_values(laplacian_and_grad_sq(field.values, field.grid)[0])


def grad_sq_sphere(field: ScalarField) -> ScalarField:
    """둥근 계량에서의 |grad f|^2"""
    return field.with_values(laplacian_and_grad_sq(field.values, field.grid)[1])


def quadrature_weights(grid: LatLonGrid) -> np.ndarray:
    """위도별 면적 가중치 cos(psi_i) h_psi (theta 방향 가중치 제외)"""
    return np.cos(grid.psi_nodes) * grid.h_psi


def integrate_sphere(field: ScalarField) -> float:
    """dV = cos(psi) dpsi dtheta 에 대한 중점 구적

    theta 합을 먼저, 그 다음 psi 오름차순으로 누적한다.
    """
    grid = field.grid
    if grid.is_axisymmetric:
        rows = field.values[:, 0] * (2.0 * np.pi)
    else:
        rows = field.values.sum(axis=1) * grid.h_theta
    total = 0.0
    for weighted in rows * quadrature_weights(grid):
        total += float(weighted)
    return total


def rotate_theta(field: ScalarField, k: int) -> ScalarField:
    """경도 방향 정확한 순환 이동: 결과(theta) = 원래(theta + k h_theta)"""
    if field.grid.is_axisymmetric:
        raise FieldError("축대칭 필드는 회전할 수 없습니다")
    return field.with_values(np.roll(field.values, -int(k), axis=1))


def _check_latitude(psi: ArrayLike):
    if np.any(np.abs(np.asarray(psi)) >= np.pi / 2):
        raise FieldError("|psi| < pi/2 이어야 합니다 (메르카토르 사상은 극에서 정의되지 않음)")


def mercator_x(psi: ArrayLike) -> ArrayLike:
    """x = arcsinh(tan psi), 즉 cosh x = sec psi"""
    _check_latitude(psi)
    return np.arcsinh(np.tan(psi))


def mercator_psi(x: ArrayLike) -> ArrayLike:
    """psi = arctan(sinh x)"""
    return np.arctan(np.sinh(x))


def mercator_dx_dpsi(psi: ArrayLike) -> ArrayLike:
    """dx/dpsi = sec psi"""
    _check_latitude(psi)
    return 1.0 / np.cos(psi)
