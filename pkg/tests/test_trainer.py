# tests/test_trainer.py
import json
import os

import numpy as np
import pytest

from src.autodiff.tensor import Tensor
from src.trainer.checkpoint import HEADER_KEY, Checkpoint, load_checkpoint, save_checkpoint
from src.trainer.config import RunConfig, TrainConfig
from src.trainer.losses import offset_loss, render_loss, total_loss
from src.trainer.trainer import METRICS_NAME, TIMINGS_NAME, Trainer, build_model_from_checkpoint
from src.utils.data_loader import load_dataset
from src.utils.errors import CheckpointError, InputError, NonFiniteLossError, ShapeError
from tests.conftest import tiny_network


def tiny_train(**overrides):
    base = dict(
        rays_per_batch=16,
        n_coarse=4,
        n_fine_glass=2,
        n_fine_vi=2,
        iterations=3,
        log_every=1,
        checkpoint_every=100,
        offset_warmup=1,
        seed=11,
        network=tiny_network(),
    )
    base.update(overrides)
    return TrainConfig(**base)


def make_trainer(dataset_dir, out_dir, deterministic=True, **overrides):
    run = RunConfig(
        train=tiny_train(**overrides), dataset=dataset_dir, output_dir=str(out_dir), deterministic=deterministic
    )
    return Trainer(load_dataset(dataset_dir), run)


# ----------------------------------------------------------------------
# 손실
# ----------------------------------------------------------------------
def test_render_loss_is_batch_sum_of_squares():
    loss = render_loss(Tensor(np.array([[0.5, 0.5, 0.5], [1.0, 0.0, 0.0]])), np.zeros((2, 3)))
    assert loss.item() == pytest.approx(0.75 + 1.0)


def test_render_loss_rejects_shape_mismatch():
    with pytest.raises(ShapeError):
        render_loss(Tensor(np.zeros((2, 3))), np.zeros((3, 3)))


def test_offset_loss_takes_one_square_root_over_all_passes():
    a = Tensor(np.full((1, 2, 3), 1.0))
    b = Tensor(np.full((1, 1, 3), 2.0))
    assert offset_loss([a, b]).item() == pytest.approx(np.sqrt(6.0 + 12.0))
    assert offset_loss(Tensor(np.zeros((2, 3)))).item() == 0.0


def test_total_loss_weights_offset_term():
    total = total_loss(Tensor(np.array(2.0)), Tensor(np.array(10.0)), epsilon=0.1)
    assert total.item() == pytest.approx(3.0)
    with pytest.raises(InputError):
        total_loss(Tensor(np.array(2.0)), Tensor(np.array(1.0)), epsilon=-1.0)


# ----------------------------------------------------------------------
# 설정
# ----------------------------------------------------------------------
def test_train_config_validation():
    with pytest.raises(InputError):
        TrainConfig(epsilon=-1e-3)
    with pytest.raises(InputError):
        TrainConfig(n_coarse=1)
    with pytest.raises(InputError):
        TrainConfig(offset_loss_scope="middle")
    with pytest.raises(InputError):
        TrainConfig.from_dict({"iterations": 10, "learning_rate": 1e-3})


def test_train_config_round_trips_through_dict():
    cfg = tiny_train(epsilon=3e-4)
    again = TrainConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


@pytest.mark.parametrize(
    "name, glass, vd",
    [("none", True, True), ("vanilla", False, False), ("no-glass", False, True), ("no-vd", True, False)],
)
def test_ablations_toggle_branches(name, glass, vd):
    cfg = TrainConfig()
    cfg.apply_ablation(name)
    render = cfg.render_config()
    assert (render.use_glass, render.use_view_dependent) == (glass, vd)


def test_unknown_ablation_rejected():
    with pytest.raises(InputError):
        TrainConfig().apply_ablation("no-light")


# ----------------------------------------------------------------------
# 체크포인트 파일
# ----------------------------------------------------------------------
def sample_checkpoint(version=1):
    params = {"w": np.arange(6.0).reshape(2, 3), "b": np.zeros(3)}
    optimizer = {
        "step": 4,
        "first_moment": {k: v + 1.0 for k, v in params.items()},
        "second_moment": {k: v + 2.0 for k, v in params.items()},
    }
    return Checkpoint(params, optimizer, iteration=4, config={"note": "x"}, version=version)


def test_checkpoint_round_trip(tmp_path):
    path = save_checkpoint(str(tmp_path / "ckpt.npz"), sample_checkpoint())
    loaded = load_checkpoint(path)
    assert loaded.iteration == 4 and loaded.optimizer["step"] == 4
    np.testing.assert_array_equal(loaded.parameters["w"], np.arange(6.0).reshape(2, 3))
    np.testing.assert_array_equal(loaded.optimizer["second_moment"]["b"], np.full(3, 2.0))
    assert loaded.config == {"note": "x"}
    assert not os.path.exists(path + ".tmp")


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(str(tmp_path / "nope.npz"))


def test_garbage_checkpoint(tmp_path):
    path = tmp_path / "bad.npz"
    path.write_bytes(b"not a zip archive at all")
    with pytest.raises(CheckpointError):
        load_checkpoint(str(path))


def test_checkpoint_without_header(tmp_path):
    path = str(tmp_path / "headless.npz")
    np.savez(path, **{"param__w": np.zeros(3)})
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_checkpoint_version_mismatch(tmp_path):
    path = save_checkpoint(str(tmp_path / "v99.npz"), sample_checkpoint(version=99))
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_checkpoint_header_shape_mismatch(tmp_path):
    header = {"version": 1, "iteration": 0, "shapes": {"param__w": [4]}, "config": {}}
    path = str(tmp_path / "shape.npz")
    encoded = np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8)
    np.savez(path, **{"param__w": np.zeros(3), HEADER_KEY: encoded})
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


# ----------------------------------------------------------------------
# 학습 루프
# ----------------------------------------------------------------------
def test_training_writes_metrics_and_checkpoint(tiny_dataset_dir, tmp_path):
    trainer = make_trainer(tiny_dataset_dir, tmp_path)
    before = trainer.model.state_arrays()
    result = trainer.train()
    assert [r.iteration for r in result.history] == [1, 2, 3]
    assert all(np.isfinite(r.total_loss) for r in result.history)

    metrics = (tmp_path / METRICS_NAME).read_text().splitlines()
    assert metrics[0] == "iteration,total_loss,render_loss,offset_loss,lr"
    assert len(metrics) == 4
    assert (tmp_path / TIMINGS_NAME).exists()

    checkpoint = load_checkpoint(result.checkpoint_path)
    assert checkpoint.iteration == 3
    model, cfg = build_model_from_checkpoint(checkpoint)
    assert cfg.network == trainer.config.network
    for name, value in model.state_arrays().items():
        np.testing.assert_array_equal(value, trainer.model.state_arrays()[name])
    assert any(not np.array_equal(before[n], v) for n, v in checkpoint.parameters.items())


def test_offset_head_frozen_during_warmup(tiny_dataset_dir, tmp_path):
    trainer = make_trainer(tiny_dataset_dir, tmp_path, offset_warmup=2)
    names = trainer.model.offset_head_names()
    before = trainer.model.state_arrays()
    trainer.step()
    trainer.step()
    after = trainer.model.state_arrays()
    for name in names:
        np.testing.assert_array_equal(after[name], before[name])
    assert any(not np.array_equal(after[n], before[n]) for n in after if n.startswith("nerf_fine."))


def test_deterministic_runs_produce_identical_metrics(tiny_dataset_dir, tmp_path):
    make_trainer(tiny_dataset_dir, tmp_path / "a").train()
    make_trainer(tiny_dataset_dir, tmp_path / "b").train()
    assert (tmp_path / "a" / METRICS_NAME).read_bytes() == (tmp_path / "b" / METRICS_NAME).read_bytes()


def test_resume_matches_uninterrupted_run(tiny_dataset_dir, tmp_path):
    straight = make_trainer(tiny_dataset_dir, tmp_path / "straight", iterations=4)
    straight.train()

    first = make_trainer(tiny_dataset_dir, tmp_path / "split", iterations=4)
    first.step()
    first.step()
    path = first.save()

    second = make_trainer(tiny_dataset_dir, tmp_path / "split", iterations=4)
    second.resume(path)
    assert second.iteration == 2
    second.train()
    for name, value in straight.model.state_arrays().items():
        np.testing.assert_array_equal(second.model.state_arrays()[name], value)


def test_resume_rejects_other_network(tiny_dataset_dir, tmp_path):
    path = make_trainer(tiny_dataset_dir, tmp_path / "a").save()
    other = make_trainer(tiny_dataset_dir, tmp_path / "b", network=tiny_network(width=8))
    with pytest.raises(CheckpointError):
        other.resume(path)


def test_non_finite_loss_stops_with_diagnostics(tiny_dataset_dir, tmp_path):
    trainer = make_trainer(tiny_dataset_dir, tmp_path)
    trainer.model.nerf_fine.color_vi_head.bias.data[:] = np.nan
    with pytest.raises(NonFiniteLossError) as info:
        trainer.step()
    assert info.value.diagnostics["iteration"] == 0
    assert "parameter_norms" in info.value.diagnostics


def test_vanilla_ablation_trains_without_glass(tiny_dataset_dir, tmp_path):
    trainer = make_trainer(tiny_dataset_dir, tmp_path, disable_glass=True, disable_view_dependent=True)
    assert not any(n.startswith("glass.") for n in trainer.params)
    result = trainer.train()
    assert all(r.offset_loss == 0.0 for r in result.history)
