"""
경계량 리포트 및 실험 기록 모델
"""

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from ancientflow.config import CSV_COLUMNS, GRID_LIMITS, settings
from ancientflow.models.flow_models import (
    ClosedFormSolution,
    EvolveVariable,
    MonitorConfig,
    Perturbation,
    SolutionKind,
    SolverConfig,
)


class ExperimentKind(enum.Enum):
    """실험 종류 (CLI 하위 명령과 동일)"""
    VERIFY_CLOSED_FORM = "verify-closed-form"
    CONVERGENCE = "convergence"
    CONTRACTION = "contraction"
    H_MONOTONICITY = "h-monotonicity"
    BOUNDS_SWEEP = "bounds-sweep"
    AREA_LAW = "area-law"


@dataclass(frozen=True)
class BoundReport:
    """한 시각의 모든 선험적 경계량과 가설 상수"""

    t: float
    lemma1_sup: float
    cor4_sup: float
    cor5_sup: float
    h_sup: float
    h_psi_sup: float
    cond6_const: float
    cond62_sup: float
    holder41_const: float
    r_min: float
    r_max: float
    h_functional: float
    area: float
    symmetry_defect: float
    # 2차원 상태에서 H는 theta 단면별 확장 진단값임을 표시 (CSV 열 아님)
    h_is_slice_extension: bool = False

    def to_row(self) -> List[float]:
        return [float(getattr(self, name)) for name in CSV_COLUMNS]

    def to_dict(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in CSV_COLUMNS}

    def is_finite(self) -> bool:
        return all(math.isfinite(value) for value in self.to_row())

    @classmethod
    def from_row(cls, row: Dict[str, float]) -> "BoundReport":
        return cls(**{name: float(row[name]) for name in CSV_COLUMNS})


def _perturbed_v_min(data: Dict, perturbation: Perturbation) -> float:
    """실험이 실제로 쓰는 초기 격자에서의 섭동 후 min v"""
    # 지연 import: services 가 이 모듈을 import 한다
    from ancientflow.services.closed_forms import sample_field
    from ancientflow.services.sphere_core import build_grid

    n_psi, n_theta = data['grid']
    if data['kind'] == ExperimentKind.H_MONOTONICITY:
        n_theta = 1
    grid = build_grid(n_psi, n_theta)
    base = sample_field(data['solution'], grid, data['time_window'][0]).values
    psi, theta = np.meshgrid(grid.psi_nodes, grid.theta_nodes, indexing="ij")
    return float(np.min(perturbation.apply(base, psi, theta)))


class ExperimentSpec(BaseModel):
    """실험 한 건의 사양"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    kind: ExperimentKind
    grid: Tuple[int, int] = (settings.default_n_psi, settings.default_n_theta)
    time_window: Tuple[float, float] = (settings.default_t_start, settings.default_t_end)
    solution: ClosedFormSolution = Field(default_factory=lambda: ClosedFormSolution.rosenau(settings.default_mu))
    perturbation: Optional[Perturbation] = None
    monitor: MonitorConfig = Field(default_factory=lambda: MonitorConfig(cadence=settings.observe_cadence))
    solver: SolverConfig = Field(
        default_factory=lambda: SolverConfig(cfl_safety=settings.cfl_safety, dt_max=settings.dt_max)
    )
    rotation_k: int = 9
    grids: Tuple[int, ...] = (64, 128, 256)
    sample_times: Tuple[float, ...] = (-50.0, -20.0, -5.0, -2.0, -1.0)
    output_path: str = ""

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        n_psi, n_theta = value
        if n_psi < GRID_LIMITS['min_n_psi']:
            raise ValueError(f"n_psi는 {GRID_LIMITS['min_n_psi']} 이상이어야 합니다 - n_psi={n_psi}")
        if n_theta != 1 and (n_theta < GRID_LIMITS['min_n_theta'] or n_theta % 2 != 0):
            raise ValueError(f"n_theta는 1 또는 {GRID_LIMITS['min_n_theta']} 이상의 짝수여야 합니다 - n_theta={n_theta}")
        return value

    @field_validator("time_window")
    @classmethod
    def _check_window(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        t_start, t_end = value
        if not t_start < t_end < 0:
            raise ValueError("time_window는 t_start < t_end < 0 이어야 합니다")
        return value

    @field_validator("sample_times")
    @classmethod
    def _check_sample_times(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value or any(t >= 0 for t in value):
            raise ValueError("sample_times는 비어 있지 않고 모두 음수여야 합니다")
        return value

    @field_validator("grids")
    @classmethod
    def _check_grids(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(value) < 2 or list(value) != sorted(set(value)):
            raise ValueError("grids는 서로 다른 두 개 이상의 n_psi 오름차순이어야 합니다")
        if value[0] < GRID_LIMITS['min_n_psi']:
            raise ValueError(f"grids의 n_psi는 {GRID_LIMITS['min_n_psi']} 이상이어야 합니다")
        return value

    @field_validator("perturbation")
    @classmethod
    def _check_perturbation(cls, value: Optional[Perturbation], info: ValidationInfo) -> Optional[Perturbation]:
        if value is None or value.amplitude == 0.0:
            return value
        # u 섭동은 1 + a cos(m theta) cos^p psi > 0 이어야 초기 min v > 0
        if value.target == EvolveVariable.U and abs(value.amplitude) >= 1.0:
            raise ValueError("u 섭동 진폭은 1보다 작아야 합니다")
        if value.target == EvolveVariable.V and {'kind', 'grid', 'time_window', 'solution'} <= info.data.keys():
            v_min = _perturbed_v_min(info.data, value)
            if not v_min > 0:
                raise ValueError(f"v 섭동 후 초기 min v가 양수가 아닙니다 - min v={v_min:.6g}")
        return value

    @property
    def is_rosenau(self) -> bool:
        return self.solution.kind == SolutionKind.ROSENAU


@dataclass
class AssertionOutcome:
    """실험 판정 하나"""

    name: str
    passed: bool
    value: float = float("nan")
    threshold: float = float("nan")
    detail: str = ""


@dataclass
class RunRecord:
    """실험 실행 기록"""

    spec: ExperimentSpec
    reports: List[BoundReport] = field(default_factory=list)
    summary: Dict[str, float] = field(default_factory=dict)
    assertions: List[AssertionOutcome] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.assertions) and all(item.passed for item in self.assertions)

    def record(self, name: str, passed: bool, value: float = float("nan"), threshold: float = float("nan"),
               detail: str = "") -> AssertionOutcome:
        outcome = AssertionOutcome(name, bool(passed), float(value), float(threshold), detail)
        self.assertions.append(outcome)
        return outcome

    def to_dict(self) -> Dict:
        return {
            "spec": self.spec.model_dump(mode="json"),
            "reports": [report.to_dict() for report in self.reports],
            "summary": dict(self.summary),
            "assertions": [asdict(item) for item in self.assertions],
            "wall_clock": self.wall_clock,
        }
