"""
실험 설정 파일(INI) 파서

    [experiment.<name>]
    kind = verify-closed-form
    n_psi = 256
    ...

알 수 없는 키가 하나라도 있으면 계산 전에 중단한다.
"""

import configparser
import re
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ValidationError

from ancientflow.config import settings
from ancientflow.exceptions import InvalidValue, MalformedConfig
from ancientflow.models.flow_models import (
    ClosedFormSolution,
    EvolveVariable,
    MonitorConfig,
    Perturbation,
    SolutionKind,
    SolverConfig,
)
from ancientflow.models.report_models import ExperimentKind, ExperimentSpec
from ancientflow.utils.logger import get_logger

SECTION_PREFIX = "experiment."

_SECTION_RE = re.compile(r"^\s*\[(?P<name>[^\]]+)\]")
_KEY_RE = re.compile(r"^\s*(?P<key>[^=:\s#;][^=:]*?)\s*[=:]")

# 키 -> 문자열 변환 함수
_CONVERTERS: Dict[str, Callable[[str], Any]] = {
    'kind': str,
    'n_psi': int,
    'n_theta': int,
    't_start': float,
    't_end': float,
    'solution': str,
    'mu': float,
    'perturbation_amplitude': float,
    'perturbation_theta_mode': int,
    'perturbation_psi_power': float,
    'perturbation_target': str,
    'rotation_k': int,
    'a_exponent': float,
    'alpha_exponent': float,
    'cadence': int,
    'cfl_safety': float,
    'dt_max': float,
    'evolve_variable': str,
    'grids': lambda text: tuple(int(item) for item in _split_list(text)),
    'sample_times': lambda text: tuple(float(item) for item in _split_list(text)),
    'output_path': str,
}

ALLOWED_KEYS = frozenset(_CONVERTERS)

_logger = get_logger("config_parser")


def _split_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _key_lines(text: str) -> Dict[Tuple[str, str], int]:
    """(섹션, 키) -> 1부터 세는 줄 번호"""
    lines: Dict[Tuple[str, str], int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        match = _SECTION_RE.match(line)
        if match:
            section = match.group("name").strip()
            lines[(section, "")] = number
            continue
        match = _KEY_RE.match(line)
        if match and section is not None and not line[:1].isspace():
            lines.setdefault((section, match.group("key").strip().lower()), number)
    return lines


def _error_line(error: configparser.Error) -> Optional[int]:
    errors = getattr(error, "errors", None)
    if isinstance(error, configparser.ParsingError) and errors:
        return errors[0][0]
    return getattr(error, "lineno", None)


def _build(model: type, field: str, **kwargs) -> BaseModel:
    """pydantic 모델 생성, 실패 시 InvalidValue(필드)"""
    try:
        return model(**kwargs)
    except ValidationError as e:
        first = e.errors()[0]
        location = first.get("loc") or ()
        name = str(location[0]) if location and location[0] in kwargs else field
        raise InvalidValue(name, first["msg"])


def _section_to_spec(name: str, values: Dict[str, Any]) -> ExperimentSpec:
    if 'kind' not in values:
        raise InvalidValue("kind", "kind 키가 필요합니다")
    try:
        kind = ExperimentKind(values['kind'])
    except ValueError:
        raise InvalidValue("kind", f"알 수 없는 실험 종류: {values['kind']}")

    try:
        solution_kind = SolutionKind(values.get('solution', SolutionKind.ROSENAU.value))
    except ValueError:
        raise InvalidValue("solution", f"알 수 없는 해: {values['solution']}")
    solution = _build(ClosedFormSolution, "mu", kind=solution_kind, mu=values.get('mu', settings.default_mu))

    perturbation = None
    if any(key.startswith("perturbation_") for key in values):
        try:
            target = EvolveVariable(values.get('perturbation_target', EvolveVariable.U.value))
        except ValueError:
            raise InvalidValue("perturbation_target", f"u 또는 v 여야 합니다: {values['perturbation_target']}")
        perturbation = _build(
            Perturbation,
            "perturbation",
            amplitude=values.get('perturbation_amplitude', 0.0),
            theta_mode=values.get('perturbation_theta_mode', 0),
            psi_power=values.get('perturbation_psi_power', 2.0),
            target=target,
        )

    monitor = _build(
        MonitorConfig,
        "monitor",
        a_exponent=values.get('a_exponent', 1.0),
        alpha_exponent=values.get('alpha_exponent', 0.5),
        cadence=values.get('cadence', settings.observe_cadence),
    )

    try:
        evolve_variable = EvolveVariable(values.get('evolve_variable', EvolveVariable.V.value))
    except ValueError:
        raise InvalidValue("evolve_variable", f"u 또는 v 여야 합니다: {values['evolve_variable']}")
    solver = _build(
        SolverConfig,
        "solver",
        cfl_safety=values.get('cfl_safety', settings.cfl_safety),
        dt_max=values.get('dt_max', settings.dt_max),
        evolve_variable=evolve_variable,
    )

    spec_kwargs: Dict[str, Any] = {
        'name': name,
        'kind': kind,
        'grid': (values.get('n_psi', settings.default_n_psi), values.get('n_theta', settings.default_n_theta)),
        'time_window': (values.get('t_start', settings.default_t_start), values.get('t_end', settings.default_t_end)),
        'solution': solution,
        'perturbation': perturbation,
        'monitor': monitor,
        'solver': solver,
    }
    for key in ('rotation_k', 'grids', 'sample_times', 'output_path'):
        if key in values:
            spec_kwargs[key] = values[key]
    return _build(ExperimentSpec, "spec", **spec_kwargs)


def parse_config(text: str) -> List[ExperimentSpec]:
    """INI 텍스트 -> 검증된 ExperimentSpec 목록 (섹션 순서 유지)"""
    if not text.strip():
        return []

    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise MalformedConfig(_error_line(e), str(e).splitlines()[0])

    lines = _key_lines(text)
    specs: List[ExperimentSpec] = []
    for section in parser.sections():
        header_line = lines.get((section, ""))
        if not section.startswith(SECTION_PREFIX) or not section[len(SECTION_PREFIX):].strip():
            raise MalformedConfig(header_line, f"섹션 이름은 [{SECTION_PREFIX}<이름>] 형식이어야 합니다: [{section}]")

        values: Dict[str, Any] = {}
        for key, raw in parser.items(section):
            line = lines.get((section, key), header_line)
            if key not in ALLOWED_KEYS:
                raise MalformedConfig(line, f"알 수 없는 키: {key}")
            try:
                values[key] = _CONVERTERS[key](raw.strip())
            except ValueError:
                raise InvalidValue(key, f"변환할 수 없는 값: {raw!r} (줄 {line})")

        spec = _section_to_spec(section[len(SECTION_PREFIX):].strip(), values)
        specs.append(spec)
        _logger.debug(f"실험 설정 로드 - 이름: {spec.name}, 종류: {spec.kind.value}")

    return specs


def load_config(path: str) -> List[ExperimentSpec]:
    """파일 경로에서 설정 읽기"""
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())
