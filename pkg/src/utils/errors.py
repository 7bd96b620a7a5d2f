# src/utils/errors.py
from typing import Dict, Optional


class GlassNerfError(Exception):
    """패키지 공통 예외"""


class ShapeError(GlassNerfError, ValueError):
    """텐서/배열 모양 불일치"""


class InputError(GlassNerfError, ValueError):
    """잘못된 입력값 (방향 벡터, 픽셀 좌표, 밀도 등)"""


class DatasetError(InputError):
    """데이터셋 매니페스트 검증 실패"""


class CheckpointError(GlassNerfError):
    """손상되었거나 호환되지 않는 체크포인트"""


class MissingGradientError(GlassNerfError, RuntimeError):
    """기울기가 없는 파라미터로 옵티마이저 스텝 호출"""


class EmptyPointCloudError(GlassNerfError, ValueError):
    """빈 포인트 클라우드로 표면 오차 계산"""


class NonFiniteLossError(GlassNerfError, FloatingPointError):
    """손실이 NaN/Inf 가 되었을 때 진단 정보와 함께 발생"""

    def __init__(self, message: str, diagnostics: Optional[Dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
