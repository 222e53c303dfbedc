"""
2차원 구면 위의 고대(ancient) 리치 흐름 수치 실험 패키지
"""

__version__ = "1.0.0"
__author__ = "AncientFlow Lab"
__description__ = "구면 위 공형 인자 리치 흐름의 고대 해 수치 실험실"
