# tests/conftest.py
import os
import sys

import numpy as np
import pytest

# 프로젝트 루트 경로 추가
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.fields.encoding import EncodingConfig  # noqa: E402
from src.fields.model import GlassNerfModel, NetworkConfig  # noqa: E402
from src.renderer.rays import RayBatch  # noqa: E402

SLOW_ENV = "GLASSNERF_RUN_SLOW"


def pytest_collection_modifyitems(config, items):
    if os.environ.get(SLOW_ENV) == "1":
        return
    skip = pytest.mark.skip(reason=f"{SLOW_ENV}=1 일 때만 실행")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def tiny_network(dtype: str = "float64", width: int = 16) -> NetworkConfig:
    return NetworkConfig(
        width=width,
        glass_depth=2,
        nerf_depth=3,
        skip_layer=2,
        feature_dim=8,
        position_scale=10.0,
        dtype=dtype,
        encoding=EncodingConfig(l_pos=3, l_dir=2),
    )


@pytest.fixture
def tiny_model():
    return GlassNerfModel(tiny_network(), seed=3)


@pytest.fixture
def two_rays():
    dirs = np.array([[0.0, 0.0, -1.0], [0.1, -0.05, -1.0]])
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    return RayBatch(np.array([[0.0, 0.0, 4.0], [0.5, 0.2, 4.0]]), dirs, near=2.0, far=6.0)


@pytest.fixture(scope="session")
def tiny_dataset_dir(tmp_path_factory):
    """12x12 해상도, train/test/val = 2/1/1 장짜리 slab-checker 데이터셋"""
    from src.oracle.presets import build_preset, default_trajectory
    from src.utils.data_generator import DatasetGenerator

    out = tmp_path_factory.mktemp("slab_checker")
    generator = DatasetGenerator(
        build_preset("slab-checker"), default_trajectory("slab-checker"), random_seed=7, points_per_face=50
    )
    generator.generate(str(out), counts=(2, 1, 1), resolution=(12, 12))
    return str(out)
