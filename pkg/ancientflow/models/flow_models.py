"""
격자, 필드, 흐름 상태 및 솔버/모니터 설정 모델
"""

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ancientflow.exceptions import ClosedFormError, FieldError


class SolutionKind(enum.Enum):
    """닫힌 형태 해의 종류"""
    ROSENAU = "rosenau"
    CONTRACTING_SPHERE = "contracting-sphere"


class Scheme(enum.Enum):
    """시간 적분 방식"""
    RK4 = "RK4"


class EvolveVariable(enum.Enum):
    """적분 대상 변수"""
    V = "v"
    U = "u"


@dataclass(frozen=True, eq=False)
class LatLonGrid:
    """극을 피하는 엇갈린 위도 격자 (psi, theta)"""

    n_psi: int
    n_theta: int
    psi_nodes: np.ndarray
    theta_nodes: np.ndarray
    h_psi: float
    h_theta: float

    @property
    def shape(self) -> tuple:
        return (self.n_psi, self.n_theta)

    @property
    def is_axisymmetric(self) -> bool:
        return self.n_theta == 1

    @property
    def psi_column(self) -> np.ndarray:
        """(n_psi, 1) 모양으로 브로드캐스트 가능한 위도"""
        return self.psi_nodes[:, None]

    @property
    def theta_row(self) -> np.ndarray:
        return self.theta_nodes[None, :]

    @cached_property
    def tan_column(self) -> np.ndarray:
        """라플라시안의 tan(psi) 계량 인자"""
        return np.tan(self.psi_column)

    @cached_property
    def sec_sq_column(self) -> np.ndarray:
        return 1.0 / np.cos(self.psi_column) ** 2

    @cached_property
    def h_eff_sq(self) -> float:
        """CFL 길이 제곱: 축대칭이면 h_psi^2, 2차원이면 극 근처 경도 간격까지 고려"""
        if self.is_axisymmetric:
            return self.h_psi ** 2
        cos_min = float(np.min(np.cos(self.psi_nodes)))
        return min(self.h_psi ** 2, (self.h_theta * cos_min) ** 2)

    def same_as(self, other: "LatLonGrid") -> bool:
        return self.n_psi == other.n_psi and self.n_theta == other.n_theta


@dataclass(frozen=True, eq=False)
class ScalarField:
    """격자 노드마다 실수 하나 (위도 우선 행 배열)"""

    grid: LatLonGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise FieldError(f"필드 모양 불일치 - 기대: {self.grid.shape}, 실제: {values.shape}")
        if not np.all(np.isfinite(values)):
            raise FieldError("필드에 NaN 또는 Inf 값이 있습니다")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: LatLonGrid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        """f(psi, theta)를 격자 노드에서 평가"""
        psi, theta = np.meshgrid(grid.psi_nodes, grid.theta_nodes, indexing="ij")
        return cls(grid, np.broadcast_to(func(psi, theta), grid.shape))

    @classmethod
    def from_profile(cls, grid: LatLonGrid, func: Callable[[np.ndarray], np.ndarray]) -> "ScalarField":
        """theta에 무관한 f(psi)"""
        column = np.asarray(func(grid.psi_nodes), dtype=float)
        return cls(grid, np.broadcast_to(column[:, None], grid.shape))

    @property
    def is_axisymmetric(self) -> bool:
        return self.grid.is_axisymmetric

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def max(self) -> float:
        return float(np.max(self.values))

    def min(self) -> float:
        return float(np.min(self.values))


@dataclass(frozen=True, eq=False)
class FlowState:
    """v 필드와 현재 시각 t < 0"""

    t: float
    v: ScalarField

    def __post_init__(self):
        if not self.t < 0:
            raise FieldError(f"흐름 상태의 시각은 음수여야 합니다 - t={self.t}")
        if not self.v.min() > 0:
            raise FieldError(f"v는 양수여야 합니다 - min v={self.v.min()}")

    @property
    def grid(self) -> LatLonGrid:
        return self.v.grid

    @property
    def u(self) -> ScalarField:
        return self.v.with_values(1.0 / self.v.values)


class ClosedFormSolution(BaseModel):
    """Rosenau(mu) 또는 수축 구면"""

    model_config = ConfigDict(frozen=True)

    kind: SolutionKind
    mu: float = Field(default=1.0, gt=0)

    @property
    def c0(self) -> float:
        """t -> -inf 극한 프로파일 C0 cos^2(psi)의 계수 (Rosenau 전용)

        수축 구면은 v -> 0 으로 균일하게 사라져 양수 C0 가 없다.
        """
        if self.kind != SolutionKind.ROSENAU:
            raise ClosedFormError("c0 는 Rosenau 해에서만 정의됩니다")
        return self.mu

    @classmethod
    def rosenau(cls, mu: float = 1.0) -> "ClosedFormSolution":
        return cls(kind=SolutionKind.ROSENAU, mu=mu)

    @classmethod
    def contracting_sphere(cls) -> "ClosedFormSolution":
        return cls(kind=SolutionKind.CONTRACTING_SPHERE)


class SolverConfig(BaseModel):
    """시간 적분 설정"""

    model_config = ConfigDict(frozen=True)

    scheme: Scheme = Scheme.RK4
    cfl_safety: float = Field(default=0.2)
    dt_max: float = Field(default=1e-2, gt=0)
    evolve_variable: EvolveVariable = EvolveVariable.V

    @field_validator("cfl_safety")
    @classmethod
    def _check_cfl(cls, value: float) -> float:
        if not 0 < value <= 1:
            raise ValueError("cfl_safety는 (0, 1] 범위여야 합니다")
        return value


class MonitorConfig(BaseModel):
    """경계량 모니터 설정"""

    model_config = ConfigDict(frozen=True)

    a_exponent: float = Field(default=1.0)
    alpha_exponent: float = Field(default=0.5)
    cadence: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def _check_exponents(self) -> "MonitorConfig":
        if not 0 < self.a_exponent < 3:
            raise ValueError("a_exponent는 (0, 3) 범위여야 합니다")
        if not 0 < self.alpha_exponent < 1:
            raise ValueError("alpha_exponent는 (0, 1) 범위여야 합니다")
        return self


class Perturbation(BaseModel):
    """초기 데이터 섭동: u <- u(1 + a cos(m theta) cos^p psi) 또는 v <- v + a cos^p psi"""

    model_config = ConfigDict(frozen=True)

    amplitude: float = 0.0
    theta_mode: int = Field(default=0, ge=0)
    psi_power: float = Field(default=2.0, ge=0)
    target: EvolveVariable = EvolveVariable.U

    def profile(self, psi: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return np.cos(self.theta_mode * theta) * np.cos(psi) ** self.psi_power

    def apply(self, v: np.ndarray, psi: np.ndarray, theta: np.ndarray) -> np.ndarray:
        if self.amplitude == 0.0:
            return v
        shape = self.amplitude * self.profile(psi, theta)
        if self.target == EvolveVariable.U:
            return v / (1.0 + shape)
        return v + shape


