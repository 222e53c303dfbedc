"""
애플리케이션 설정 관리
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """애플리케이션 설정"""

    model_config = SettingsConfigDict(
        env_prefix="ANCIENTFLOW_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # 로깅 설정
    log_level: str = Field(default="INFO")
    log_file: str = Field(default="logs/ancientflow.log")
    log_dir: str = Field(default="logs")

    # 출력 설정
    output_dir: str = Field(default="results")

    # 실험 기본값
    default_mu: float = Field(default=1.0, gt=0)
    default_t_start: float = Field(default=-5.0, lt=0)
    default_t_end: float = Field(default=-0.5, lt=0)
    default_n_psi: int = Field(default=256, ge=8)
    default_n_theta: int = Field(default=1, ge=1)

    # 솔버 설정
    cfl_safety: float = Field(default=0.2, gt=0, le=1)
    dt_max: float = Field(default=1e-2, gt=0)
    observe_cadence: int = Field(default=50, ge=1)

    # 병렬 실행 설정
    max_workers: int = Field(default=4, ge=1)


# 전역 설정 인스턴스
settings = Settings()


# 격자 제한
GRID_LIMITS = {
    'min_n_psi': 8,
    'min_n_theta': 8,  # 1(축대칭) 이외에는 짝수여야 함
}

# 실험 판정 허용 오차
ACCEPTANCE_TOLERANCES = {
    'pde_residual': 1e-10,
    'closed_form_qx': 1e-12,
    'limit_gap': 1e-12,
    'area_quadrature_rel': 1e-6,
    'area_slope_rel': 5e-3,
    'convergence_ratio_low': 3.5,
    'convergence_ratio_high': 4.5,
    'convergence_error_256': 5e-4,
    'contraction_slack': 1e-8,
    'h_drift_per_time': 1e-6,
    'harnack_rate': -1e-8,
    'bounds_envelope_rel': 0.1,
    'constant_spread': 1e-12,
    'constant_track': 1e-9,
    'monotone_v': 1e-8,
}

# 해상도 판정: 극 주변 캡 폭이 격자 간격의 몇 배 이상이어야 하는지
CAP_RESOLUTION_FACTOR = 4.0

# BoundReport CSV 열 순서 (고정)
CSV_COLUMNS = [
    't',
    'lemma1_sup',
    'cor4_sup',
    'cor5_sup',
    'h_sup',
    'h_psi_sup',
    'cond6_const',
    'cond62_sup',
    'holder41_const',
    'r_min',
    'r_max',
    'h_functional',
    'area',
    'symmetry_defect',
]

# CSV 숫자 형식 (배정밀도 왕복 보장)
CSV_FLOAT_FORMAT = "%.17g"
