# src/utils/config.py
"""
설정 로드.
우선순위: CLI 플래그 > 설정 파일 > 데이터클래스 기본값
"""

import json
import os
from dataclasses import fields, is_dataclass
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from src.utils.errors import InputError

THREADS_ENV = "GLASSNERF_THREADS"


def load_env(path: Optional[str] = None) -> None:
    """.env 파일이 있으면 환경 변수로 읽는다 (이미 설정된 값은 유지)"""
    load_dotenv(dotenv_path=path, override=False)


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        threads = int(raw)
    except ValueError as e:
        raise InputError(f"{THREADS_ENV} 는 정수여야 합니다: {raw!r}") from e
    if threads < 1:
        raise InputError(f"{THREADS_ENV} 는 1 이상이어야 합니다: {threads}")
    return threads


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    if not os.path.exists(path):
        raise InputError(f"설정 파일이 없습니다: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f"설정 파일 JSON 파싱 실패 ({path}): {e}") from e
    if not isinstance(data, dict):
        raise InputError(f"설정 파일 최상위는 객체여야 합니다: {path}")
    return data


def merge_config(defaults: Dict[str, Any], *layers: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """뒤 층이 앞 층을 덮어쓴다. None 값은 건너뛰고 dict 는 재귀 병합"""
    merged = dict(defaults)
    for layer in layers:
        for key, value in (layer or {}).items():
            if value is None:
                continue
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = merge_config(merged[key], value)
            else:
                merged[key] = value
    return merged


def dataclass_from_dict(cls, data: Dict[str, Any]):
    """알 수 없는 키는 InputError"""
    if not is_dataclass(cls):
        raise TypeError(f"{cls} 는 dataclass 가 아닙니다")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise InputError(f"{cls.__name__} 에 없는 설정 키: {unknown}")
    return cls(**data)
