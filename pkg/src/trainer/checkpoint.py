# src/trainer/checkpoint.py
"""
체크포인트 컨테이너.
numpy .npz 한 파일에 파라미터/모멘트 블롭과 UTF-8 JSON 헤더(__header__)를 담는다.
"""

import json
import logging
import os
import zipfile
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.utils.errors import CheckpointError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER_KEY = "__header__"
PARAM_PREFIX = "param__"
FIRST_PREFIX = "adam_m__"
SECOND_PREFIX = "adam_v__"


@dataclass
class Checkpoint:
    parameters: Dict[str, np.ndarray]
    optimizer: Dict  # Adam.state_dict() 형식
    iteration: int
    config: Dict
    rng_state: Optional[Dict] = None
    version: int = FORMAT_VERSION


def _encode_header(header: Dict) -> np.ndarray:
    return np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)


def save_checkpoint(path: str, checkpoint: Checkpoint) -> str:
    """임시 파일에 쓴 뒤 os.replace 로 교체"""
    blobs = {}
    for name, value in checkpoint.parameters.items():
        blobs[PARAM_PREFIX + name] = np.asarray(value)
    for name, value in checkpoint.optimizer.get("first_moment", {}).items():
        blobs[FIRST_PREFIX + name] = np.asarray(value)
    for name, value in checkpoint.optimizer.get("second_moment", {}).items():
        blobs[SECOND_PREFIX + name] = np.asarray(value)
    header = {
        "version": checkpoint.version,
        "iteration": int(checkpoint.iteration),
        "optimizer_step": int(checkpoint.optimizer.get("step", 0)),
        "shapes": {k: list(v.shape) for k, v in blobs.items()},
        "dtypes": {k: str(v.dtype) for k, v in blobs.items()},
        "config": checkpoint.config,
        "rng_state": checkpoint.rng_state,
    }
    blobs[HEADER_KEY] = _encode_header(header)

    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "wb") as f:
        np.savez(f, **blobs)
    os.replace(tmp_path, path)
    logger.debug("체크포인트 저장: %s (iteration %d)", path, checkpoint.iteration)
    return path


def load_checkpoint(path: str) -> Checkpoint:
    if not os.path.exists(path):
        raise CheckpointError(f"체크포인트 파일이 없습니다: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            blobs = {k: data[k] for k in data.files}
    except (OSError, ValueError, zipfile.BadZipFile, EOFError) as e:
        raise CheckpointError(f"체크포인트를 읽을 수 없습니다 ({path}): {e}") from e

    if HEADER_KEY not in blobs:
        raise CheckpointError(f"체크포인트 헤더가 없습니다: {path}")
    try:
        header = json.loads(blobs.pop(HEADER_KEY).tobytes().decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"체크포인트 헤더가 손상되었습니다 ({path}): {e}") from e

    version = header.get("version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"지원하지 않는 체크포인트 버전 {version} (기대 {FORMAT_VERSION}): {path}")
    shapes = header.get("shapes", {})
    if set(shapes) != set(blobs):
        raise CheckpointError(f"헤더와 블롭 목록이 다릅니다: {path}")
    for key, shape in shapes.items():
        if list(blobs[key].shape) != shape:
            raise CheckpointError(f"{key}: 블롭 모양 {blobs[key].shape} ≠ 헤더 {shape}")

    def strip(prefix):
        return {k[len(prefix):]: v for k, v in blobs.items() if k.startswith(prefix)}

    return Checkpoint(
        parameters=strip(PARAM_PREFIX),
        optimizer={
            "step": int(header.get("optimizer_step", 0)),
            "first_moment": strip(FIRST_PREFIX),
            "second_moment": strip(SECOND_PREFIX),
        },
        iteration=int(header["iteration"]),
        config=header.get("config", {}),
        rng_state=header.get("rng_state"),
        version=version,
    )
