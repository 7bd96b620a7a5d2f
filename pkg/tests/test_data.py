# tests/test_data.py
import json
import os
import shutil

import numpy as np
import pytest
from PIL import Image

from src.oracle.presets import build_preset, default_trajectory
from src.renderer.pipeline import RenderConfig
from src.utils.config import THREADS_ENV, dataclass_from_dict, default_threads, load_config_file, merge_config
from src.utils.data_generator import MANIFEST_NAME, DatasetGenerator, generate_dataset
from src.utils.data_loader import check_rigid, load_dataset, load_poses, read_manifest
from src.utils.errors import DatasetError, InputError
from src.utils.image_io import read_depth, write_depth


def copy_dataset(src, dst):
    shutil.copytree(src, dst)
    return str(dst)


def edit_manifest(root, edit):
    path = os.path.join(root, MANIFEST_NAME)
    with open(path, encoding="utf-8") as f:
        manifest = json.load(f)
    edit(manifest)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f)


# ----------------------------------------------------------------------
# 생성기
# ----------------------------------------------------------------------
def test_generated_dataset_layout(tiny_dataset_dir):
    manifest = read_manifest(tiny_dataset_dir)
    assert [f["split"] for f in manifest["frames"]] == ["train", "train", "test", "val"]
    assert manifest["width"] == 12 and manifest["height"] == 12
    assert manifest["units"] == "cm"
    assert len(manifest["ground_truth"]["slabs"]) == 1
    for frame in manifest["frames"]:
        for key in ("file_path", "depth_path", "reflection_path"):
            assert os.path.exists(os.path.join(tiny_dataset_dir, frame[key]))

    dataset = load_dataset(tiny_dataset_dir)
    assert dataset.has_glass_truth
    assert dataset.glass_points().shape == (100, 3)
    frame = dataset.split("train")[0]
    assert frame.image.shape == (12, 12, 3)
    assert dataset.depth(frame).shape == (12, 12)
    assert dataset.reflection(frame).shape == (12, 12, 3)


def test_generation_is_deterministic(tiny_dataset_dir, tmp_path):
    generator = DatasetGenerator(
        build_preset("slab-checker"), default_trajectory("slab-checker"), random_seed=7, points_per_face=50
    )
    generator.generate(str(tmp_path), counts=(2, 1, 1), resolution=(12, 12), threads=2)
    for name in (MANIFEST_NAME, "train/r_000.png", "train/r_001_depth.png", "val/r_000_reflection.png"):
        with open(os.path.join(tiny_dataset_dir, name), "rb") as a, open(tmp_path / name, "rb") as b:
            assert a.read() == b.read(), name


def test_generate_dataset_entry_point(tmp_path):
    result = generate_dataset(
        build_preset("slab-checker"), default_trajectory("slab-checker"), (1, 1, 1), (6, 6), seed=5, out_dir=str(tmp_path)
    )
    assert result.image_count == 3
    assert result.glass_point_count > 0
    assert result.manifest_path == os.path.join(str(tmp_path), MANIFEST_NAME)
    assert read_manifest(str(tmp_path))["generator"]["seed"] == 5


def test_generator_rejects_empty_split():
    generator = DatasetGenerator(build_preset("slab-checker"), default_trajectory("slab-checker"))
    with pytest.raises(InputError):
        generator.plan_views((2, 0, 1))


def test_no_glass_preset_has_no_truth(tmp_path):
    DatasetGenerator(build_preset("no-glass"), default_trajectory("no-glass")).generate(
        str(tmp_path), counts=(1, 1, 1), resolution=(4, 4)
    )
    dataset = load_dataset(str(tmp_path))
    assert not dataset.has_glass_truth
    assert dataset.glass_slabs == []


# ----------------------------------------------------------------------
# 로더
# ----------------------------------------------------------------------
def test_missing_manifest(tmp_path):
    with pytest.raises(DatasetError, match="매니페스트가 없습니다"):
        load_dataset(str(tmp_path))


def test_missing_image(tiny_dataset_dir, tmp_path):
    root = copy_dataset(tiny_dataset_dir, tmp_path / "ds")
    os.remove(os.path.join(root, "test", "r_000.png"))
    with pytest.raises(DatasetError, match="이미지 파일이 없습니다"):
        load_dataset(root)


def test_resolution_mismatch(tiny_dataset_dir, tmp_path):
    root = copy_dataset(tiny_dataset_dir, tmp_path / "ds")
    Image.new("RGB", (13, 12)).save(os.path.join(root, "val", "r_000.png"))
    with pytest.raises(DatasetError, match="해상도"):
        load_dataset(root)


def test_non_rigid_transform(tiny_dataset_dir, tmp_path):
    root = copy_dataset(tiny_dataset_dir, tmp_path / "ds")

    def scale_first(manifest):
        matrix = np.asarray(manifest["frames"][0]["transform_matrix"])
        matrix[:3, :3] *= 2.0
        manifest["frames"][0]["transform_matrix"] = matrix.tolist()

    edit_manifest(root, scale_first)
    with pytest.raises(DatasetError, match="강체가 아닙니다"):
        load_dataset(root)


def test_malformed_manifest(tmp_path):
    (tmp_path / MANIFEST_NAME).write_text("{ frames: ", encoding="utf-8")
    with pytest.raises(DatasetError, match="JSON"):
        load_dataset(str(tmp_path))


def test_skip_image_loading(tiny_dataset_dir):
    dataset = load_dataset(tiny_dataset_dir, load_images=False)
    assert all(f.image is None for f in dataset.frames)


def test_check_rigid_reasons():
    assert check_rigid(np.eye(4)) is None
    assert "4x4" in check_rigid(np.eye(3))
    bad_row = np.eye(4)
    bad_row[3, 0] = 1.0
    assert "마지막 행" in check_rigid(bad_row)
    mirror = np.diag([1.0, 1.0, -1.0, 1.0])
    assert "행렬식" in check_rigid(mirror)


def test_load_poses_by_split(tiny_dataset_dir):
    path = os.path.join(tiny_dataset_dir, MANIFEST_NAME)
    assert len(load_poses(path)) == 4
    assert len(load_poses(path, split="train")) == 2
    assert load_poses(path, split="val")[0].shape == (4, 4)


def test_load_poses_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("[[1, 0", encoding="utf-8")
    with pytest.raises(InputError):
        load_poses(str(broken))
    empty = tmp_path / "empty.json"
    empty.write_text("[]", encoding="utf-8")
    with pytest.raises(InputError):
        load_poses(str(empty))
    skewed = tmp_path / "skewed.json"
    skewed.write_text(json.dumps([(np.eye(4) * 3.0).tolist()]), encoding="utf-8")
    with pytest.raises(InputError):
        load_poses(str(skewed))


def test_depth_png_round_trip(tmp_path):
    scale = 60.0 / 65535
    depth = np.array([[0.0, 12.345], [30.0, 59.99]])
    write_depth(str(tmp_path / "d.png"), depth, scale)
    np.testing.assert_allclose(read_depth(str(tmp_path / "d.png"), scale), depth, atol=scale / 2 + 1e-12)
    with pytest.raises(InputError):
        write_depth(str(tmp_path / "e.png"), depth, 0.0)


# ----------------------------------------------------------------------
# 설정
# ----------------------------------------------------------------------
def test_merge_config_precedence():
    defaults = {"iterations": 10, "network": {"width": 64, "dtype": "float32"}}
    file_layer = {"iterations": 20, "network": {"width": 32}}
    cli_layer = {"iterations": None, "seed": 3}
    merged = merge_config(defaults, file_layer, cli_layer)
    assert merged == {"iterations": 20, "seed": 3, "network": {"width": 32, "dtype": "float32"}}
    assert defaults["network"]["width"] == 64


def test_dataclass_from_dict_rejects_unknown_keys():
    assert dataclass_from_dict(RenderConfig, {"n_coarse": 4}).n_coarse == 4
    with pytest.raises(InputError):
        dataclass_from_dict(RenderConfig, {"n_coarse": 4, "n_medium": 2})


def test_config_file_errors(tmp_path):
    assert load_config_file(None) == {}
    with pytest.raises(InputError):
        load_config_file(str(tmp_path / "missing.json"))
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(InputError):
        load_config_file(str(listing))


def test_default_threads_from_environment(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert default_threads() == 1
    monkeypatch.setenv(THREADS_ENV, "4")
    assert default_threads() == 4
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(InputError):
        default_threads()
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(InputError):
        default_threads()
