# src/trainer/trainer.py
import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.autodiff.optimizer import Adam, ExponentialDecay
from src.autodiff.tensor import Tensor
from src.fields.model import GlassNerfModel, NetworkConfig
from src.renderer.pipeline import GlassNerfRenderer, RenderOutput
from src.renderer.rays import generate_rays
from src.trainer.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from src.trainer.config import RunConfig, TrainConfig
from src.trainer.losses import offset_loss, render_loss, total_loss
from src.utils.data_loader import Dataset
from src.utils.errors import CheckpointError, DatasetError, NonFiniteLossError

logger = logging.getLogger(__name__)

METRICS_NAME = "metrics.csv"
TIMINGS_NAME = "timings.csv"
CHECKPOINT_NAME = "checkpoint.npz"
RUN_CONFIG_NAME = "run_config.json"


@dataclass
class StepResult:
    iteration: int  # 이 스텝이 끝난 뒤의 반복 수
    total_loss: float
    render_loss: float
    offset_loss: float
    lr: float


@dataclass
class TrainResult:
    checkpoint_path: str
    metrics_path: str
    history: List[StepResult] = field(default_factory=list)


def collect_offsets(output: RenderOutput, scope: str) -> List[Tensor]:
    """L_offset 에 들어갈 Δx (원시 오프셋, 가중치 곱 아님)"""
    if scope == "coarse":
        return [output.coarse.offsets]
    if scope == "fine":
        return [output.fine.offsets]
    return [output.coarse.offsets, output.fine.offsets]


class Trainer:
    """광선 배치 학습 루프"""

    def __init__(self, dataset: Dataset, run: RunConfig):
        self.dataset = dataset
        self.run = run
        self.config: TrainConfig = run.train
        self.frames = dataset.split("train")
        if not self.frames:
            raise DatasetError(f"학습 split 이 비어 있습니다: {dataset.root}")
        if any(f.image is None for f in self.frames):
            raise DatasetError("학습 이미지가 로드되지 않았습니다 (load_images=True 필요)")
        self.cameras = [dataset.camera(f) for f in self.frames]

        cfg = self.config
        self.model = GlassNerfModel(cfg.network, seed=cfg.seed)
        self.renderer = GlassNerfRenderer(self.model, cfg.render_config())
        self.params = self.model.trainable_parameters(cfg.use_glass, cfg.use_view_dependent)
        self.optimizer = Adam(self.params)
        self.schedule = ExponentialDecay(
            cfg.lr_init * cfg.lr_scale, cfg.lr_final * cfg.lr_scale, max(cfg.iterations, 1)
        )
        self.frozen_names = self.model.offset_head_names() if cfg.use_glass else []
        self.rng = np.random.default_rng(cfg.seed)
        self.iteration = 0

    @property
    def checkpoint_path(self) -> str:
        return os.path.join(self.run.output_dir, CHECKPOINT_NAME)

    @property
    def metrics_path(self) -> str:
        return os.path.join(self.run.output_dir, METRICS_NAME)

    # ------------------------------------------------------------------
    # 체크포인트
    # ------------------------------------------------------------------
    def snapshot(self) -> Checkpoint:
        return Checkpoint(
            parameters=self.model.state_arrays(),
            optimizer=self.optimizer.state_dict(),
            iteration=self.iteration,
            config=self.run.to_dict(),
            rng_state=self.rng.bit_generator.state,
        )

    def save(self, path: Optional[str] = None) -> str:
        return save_checkpoint(path or self.checkpoint_path, self.snapshot())

    def resume(self, path: str) -> None:
        checkpoint = load_checkpoint(path)
        saved = checkpoint.config.get("train", {}).get("network")
        if saved is not None and NetworkConfig.from_dict(saved) != self.config.network:
            raise CheckpointError(f"체크포인트의 네트워크 설정이 현재 설정과 다릅니다: {path}")
        try:
            self.model.load_state_arrays(checkpoint.parameters)
            self.optimizer.load_state_dict(checkpoint.optimizer)
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"체크포인트를 모델에 적용할 수 없습니다 ({path}): {e}") from e
        if checkpoint.rng_state is not None:
            self.rng.bit_generator.state = checkpoint.rng_state
        self.iteration = checkpoint.iteration
        logger.info("체크포인트에서 재개: %s (iteration %d)", path, self.iteration)

    # ------------------------------------------------------------------
    # 학습 스텝
    # ------------------------------------------------------------------
    def sample_batch(self):
        """이미지 하나를 고르고 그 안에서 픽셀을 균일하게 뽑는다"""
        cfg = self.config
        index = int(self.rng.integers(len(self.frames)))
        frame, camera = self.frames[index], self.cameras[index]
        cols = self.rng.integers(camera.width, size=cfg.rays_per_batch)
        rows = self.rng.integers(camera.height, size=cfg.rays_per_batch)
        rays = generate_rays(camera, np.stack([cols, rows], axis=-1), self.dataset.near, self.dataset.far)
        return rays, frame.image[rows, cols]

    def losses(self, output: RenderOutput, target: np.ndarray):
        cfg = self.config
        l_render = render_loss(output.fine.rgb, target) + render_loss(output.coarse.rgb, target)
        if cfg.use_glass:
            l_offset = offset_loss(collect_offsets(output, cfg.offset_loss_scope))
        else:
            l_offset = Tensor(np.zeros((), dtype=l_render.dtype))
        return total_loss(l_render, l_offset, cfg.epsilon), l_render, l_offset

    def diagnostics(self, lr: float, **losses) -> Dict:
        norms = {n: float(np.linalg.norm(p.data)) for n, p in self.params.items()}
        grads = {n: float(np.linalg.norm(p.grad)) for n, p in self.params.items() if p.grad is not None}
        return {"iteration": self.iteration, "lr": lr, "parameter_norms": norms, "gradient_norms": grads, **losses}

    def step(self) -> StepResult:
        cfg = self.config
        lr = self.schedule(self.iteration)
        rays, target = self.sample_batch()
        output = self.renderer.render_rays(rays, self.rng)
        loss, l_render, l_offset = self.losses(output, target)

        values = {
            "total_loss": float(loss.item()),
            "render_loss": float(l_render.item()),
            "offset_loss": float(l_offset.item()),
        }
        if not all(np.isfinite(v) for v in values.values()):
            raise NonFiniteLossError(
                f"iteration {self.iteration} 에서 손실이 유한하지 않습니다: {values}",
                self.diagnostics(lr, **values),
            )

        self.optimizer.zero_grad()
        loss.backward()
        frozen = self.frozen_names if self.iteration < cfg.offset_warmup else ()
        self.optimizer.step(lr, frozen=frozen)
        self.iteration += 1
        return StepResult(self.iteration, lr=lr, **values)

    # ------------------------------------------------------------------
    # 로그
    # ------------------------------------------------------------------
    def _prepare_outputs(self) -> None:
        os.makedirs(self.run.output_dir, exist_ok=True)
        with open(os.path.join(self.run.output_dir, RUN_CONFIG_NAME), "w", encoding="utf-8") as f:
            json.dump(self.run.to_dict(), f, indent=2, sort_keys=True)
        # 재개 시 체크포인트 이후에 기록된 행은 버린다
        for name in (METRICS_NAME, TIMINGS_NAME):
            path = os.path.join(self.run.output_dir, name)
            if os.path.exists(path):
                table = pd.read_csv(path)
                table[table["iteration"] <= self.iteration].to_csv(path, index=False)

    def _append(self, name: str, row: Dict) -> None:
        path = os.path.join(self.run.output_dir, name)
        pd.DataFrame([row]).to_csv(path, mode="a", header=not os.path.exists(path), index=False)

    def log(self, result: StepResult, wall_time: float) -> None:
        row = {
            "iteration": result.iteration,
            "total_loss": result.total_loss,
            "render_loss": result.render_loss,
            "offset_loss": result.offset_loss,
            "lr": result.lr,
        }
        if self.run.deterministic:
            self._append(METRICS_NAME, row)
            self._append(TIMINGS_NAME, {"iteration": result.iteration, "wall_time": wall_time})
        else:
            self._append(METRICS_NAME, {**row, "wall_time": wall_time})

    def train(
        self,
        progress: bool = False,
        on_step: Optional[Callable[[StepResult], None]] = None,
    ) -> TrainResult:
        cfg = self.config
        self._prepare_outputs()
        history: List[StepResult] = []
        start = time.perf_counter()
        bar = tqdm(total=cfg.iterations, initial=self.iteration, desc="train", disable=not progress)
        try:
            while self.iteration < cfg.iterations:
                result = self.step()
                history.append(result)
                bar.update(1)
                if result.iteration % cfg.log_every == 0 or result.iteration == cfg.iterations:
                    self.log(result, time.perf_counter() - start)
                    if progress:
                        tqdm.write(
                            f"[{result.iteration:6d}] loss={result.total_loss:.5f} "
                            f"render={result.render_loss:.5f} offset={result.offset_loss:.4f} lr={result.lr:.2e}"
                        )
                if on_step is not None:
                    on_step(result)
                if result.iteration % cfg.checkpoint_every == 0:
                    self.save()
        finally:
            bar.close()
        path = self.save()
        return TrainResult(checkpoint_path=path, metrics_path=self.metrics_path, history=history)


def build_model_from_checkpoint(checkpoint: Checkpoint):
    """저장된 설정으로 모델을 만들고 파라미터를 채운다. (model, TrainConfig)"""
    try:
        train_cfg = TrainConfig.from_dict(checkpoint.config["train"])
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"체크포인트에 학습 설정이 없습니다: {e}") from e
    model = GlassNerfModel(train_cfg.network, seed=train_cfg.seed)
    try:
        model.load_state_arrays(checkpoint.parameters)
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"체크포인트 파라미터를 적용할 수 없습니다: {e}") from e
    return model, train_cfg


def train(dataset: Dataset, run: RunConfig, progress: bool = False) -> TrainResult:
    trainer = Trainer(dataset, run)
    if run.checkpoint:
        trainer.resume(run.checkpoint)
    return trainer.train(progress=progress)
