"""
예외 정의
"""

from typing import Optional


class AncientFlowError(Exception):
    """패키지 공통 예외"""


class GridError(AncientFlowError):
    """잘못된 격자 파라미터 또는 격자 불일치"""


class FieldError(AncientFlowError):
    """유한하지 않거나 양수가 아닌 필드, 축대칭 필드 회전 등"""


class ClosedFormError(AncientFlowError):
    """닫힌 형태 해의 정의역 위반 또는 자체 검증 실패"""


class SolverError(AncientFlowError):
    """시간 적분 오류"""


class PositivityLost(SolverError):
    """min(v) <= 0: 시간 간격이 너무 크거나 소멸 시각에 근접"""

    def __init__(self, t: float, v_min: float):
        self.t = t
        self.v_min = v_min
        super().__init__(f"양수성 상실 - t={t:.6g}, min v={v_min:.6g}")


class TimeCrossedZero(SolverError):
    """t + dt >= 0: 소멸 시각 t = 0을 넘어서는 스텝"""

    def __init__(self, t: float, dt: float):
        self.t = t
        self.dt = dt
        super().__init__(f"시간이 0을 넘음 - t={t:.6g}, dt={dt:.6g}")


class ConfigError(AncientFlowError):
    """실험 설정 오류"""


class MalformedConfig(ConfigError):
    """설정 파일 구문 오류 (줄 번호 포함)"""

    def __init__(self, line: Optional[int], message: str):
        self.line = line
        super().__init__(f"설정 파일 오류 (줄 {line}): {message}")


class InvalidValue(ConfigError):
    """설정 값 검증 실패 (필드 이름 포함)"""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"잘못된 값 - 필드: {field} {message}".rstrip())


class ReportIOError(AncientFlowError):
    """결과 파일 입출력 오류 (경로 포함)"""

    def __init__(self, path: str, error: Exception):
        self.path = path
        super().__init__(f"결과 파일 입출력 오류 - 경로: {path}, 에러: {error}")
