"""
도메인 모델 정의
"""

from .flow_models import *
from .report_models import *

__all__ = [
    'SolutionKind',
    'Scheme',
    'EvolveVariable',
    'LatLonGrid',
    'ScalarField',
    'FlowState',
    'ClosedFormSolution',
    'SolverConfig',
    'MonitorConfig',
    'Perturbation',
    'ExperimentKind',
    'BoundReport',
    'ExperimentSpec',
    'AssertionOutcome',
    'RunRecord',
]
