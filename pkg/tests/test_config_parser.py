"""
실험 설정 파서 테스트
"""

from pathlib import Path

import pytest

from ancientflow.exceptions import ConfigError, InvalidValue, MalformedConfig
from ancientflow.models.flow_models import EvolveVariable, SolutionKind
from ancientflow.models.report_models import ExperimentKind
from ancientflow.services.config_parser import load_config, parse_config

SAMPLE = """\
# 주석
[experiment.closed]
kind = verify-closed-form
mu = 2.0
t_start = -4
t_end = -0.5

[experiment.pair]
kind = contraction
n_psi = 32
n_theta = 16
perturbation_amplitude = 0.05
perturbation_theta_mode = 1
rotation_k = 3
cfl_safety = 0.5
sample_times = -3, -2
grids = 16, 32
"""


def _section(body: str) -> str:
    return "[experiment.case]\n" + body


def test_parse_sample_keeps_order_and_values():
    specs = parse_config(SAMPLE)
    assert [spec.name for spec in specs] == ["closed", "pair"]

    closed, pair = specs
    assert closed.kind == ExperimentKind.VERIFY_CLOSED_FORM
    assert closed.solution.kind == SolutionKind.ROSENAU
    assert closed.solution.mu == 2.0
    assert closed.time_window == (-4.0, -0.5)
    assert closed.perturbation is None

    assert pair.kind == ExperimentKind.CONTRACTION
    assert pair.grid == (32, 16)
    assert pair.perturbation.amplitude == 0.05
    assert pair.perturbation.theta_mode == 1
    assert pair.perturbation.psi_power == 2.0
    assert pair.perturbation.target == EvolveVariable.U
    assert pair.rotation_k == 3
    assert pair.solver.cfl_safety == 0.5
    assert pair.sample_times == (-3.0, -2.0)
    assert pair.grids == (16, 32)


def test_empty_config_has_no_experiments():
    assert parse_config("") == []
    assert parse_config("\n  \n") == []


def test_contracting_sphere_solution():
    (spec,) = parse_config(_section("kind = bounds-sweep\nsolution = contracting-sphere\n"))
    assert spec.solution.kind == SolutionKind.CONTRACTING_SPHERE
    assert not spec.is_rosenau


def test_unknown_key_reports_line():
    with pytest.raises(MalformedConfig) as error:
        parse_config("[experiment.a]\nkind = convergence\nbogus = 1\n")
    assert error.value.line == 3


def test_section_name_must_have_prefix():
    with pytest.raises(MalformedConfig) as error:
        parse_config("[experiment.a]\nkind = convergence\n\n[other]\nkind = convergence\n")
    assert error.value.line == 4
    with pytest.raises(MalformedConfig):
        parse_config("[experiment.]\nkind = convergence\n")


def test_key_before_section_is_malformed():
    with pytest.raises(MalformedConfig) as error:
        parse_config("kind = convergence\n")
    assert error.value.line == 1


def test_duplicate_section_is_malformed():
    with pytest.raises(MalformedConfig):
        parse_config("[experiment.a]\nkind = convergence\n[experiment.a]\nkind = convergence\n")


@pytest.mark.parametrize(
    "body, field",
    [
        ("n_psi = 256\n", "kind"),
        ("kind = nonsense\n", "kind"),
        ("kind = convergence\nn_psi = abc\n", "n_psi"),
        ("kind = convergence\nt_end = 0.1\n", "time_window"),
        ("kind = convergence\nt_start = -1\nt_end = -2\n", "time_window"),
        ("kind = convergence\nmu = -1\n", "mu"),
        ("kind = convergence\nsolution = torus\n", "solution"),
        ("kind = convergence\ncfl_safety = 1.5\n", "cfl_safety"),
        ("kind = convergence\ncadence = 0\n", "cadence"),
        ("kind = convergence\nevolve_variable = w\n", "evolve_variable"),
        ("kind = contraction\nperturbation_amplitude = 1.5\n", "perturbation"),
        ("kind = contraction\nperturbation_target = w\n", "perturbation_target"),
        ("kind = convergence\ngrids = 64\n", "grids"),
        ("kind = convergence\ngrids = 128, 64\n", "grids"),
        ("kind = bounds-sweep\nsample_times = -1, 2\n", "sample_times"),
        ("kind = convergence\nn_theta = 7\n", "grid"),
        ("kind = convergence\nn_theta = 4\n", "grid"),
        ("kind = convergence\nn_psi = 4\n", "grid"),
        ("kind = convergence\ngrids = 4, 8\n", "grids"),
        (
            "kind = h-monotonicity\nn_psi = 16\nt_start = -1\nt_end = -0.9\n"
            "perturbation_target = v\nperturbation_amplitude = -2\nperturbation_psi_power = 4\n",
            "perturbation",
        ),
    ],
)
def test_invalid_values_name_the_field(body, field):
    with pytest.raises(InvalidValue) as error:
        parse_config(_section(body))
    assert error.value.field == field
    assert isinstance(error.value, ConfigError)


def test_load_config_from_file(tmp_path):
    path = tmp_path / "experiments.ini"
    path.write_text(SAMPLE, encoding="utf-8")
    assert [spec.name for spec in load_config(str(path))] == ["closed", "pair"]


def test_acceptance_config_is_valid():
    path = Path(__file__).resolve().parent.parent / "experiments" / "acceptance.ini"
    specs = load_config(str(path))
    assert len(specs) == 11
    assert {spec.kind for spec in specs} == set(ExperimentKind)


def test_small_v_perturbation_is_accepted():
    (spec,) = parse_config(
        _section(
            "kind = h-monotonicity\nn_psi = 16\nt_start = -1\nt_end = -0.9\n"
            "perturbation_target = v\nperturbation_amplitude = -0.01\nperturbation_psi_power = 4\n"
        )
    )
    assert spec.perturbation.target == EvolveVariable.V
    assert spec.perturbation.amplitude == -0.01
