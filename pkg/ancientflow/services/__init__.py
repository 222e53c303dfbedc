"""
서비스 모듈 정의
"""

from .diagnostics import BoundMonitor
from .experiment_runner import ExperimentRunner
from .flow_solver import FlowSolver
from .config_parser import parse_config, load_config
from .report_writer import emit_csv, emit_summary, load_records

__all__ = [
    'BoundMonitor',
    'ExperimentRunner',
    'FlowSolver',
    'parse_config',
    'load_config',
    'emit_csv',
    'emit_summary',
    'load_records',
]
