# src/trainer/config.py
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

from src.fields.model import NetworkConfig
from src.renderer.pipeline import RenderConfig
from src.trainer.losses import DEFAULT_EPSILON
from src.utils.config import dataclass_from_dict
from src.utils.errors import InputError

OFFSET_SCOPES = ("both", "coarse", "fine")
REFERENCE_BATCH = 1024


@dataclass
class TrainConfig:
    """학습 하이퍼파라미터 (데스크 규모 기본값)"""

    rays_per_batch: int = 256
    n_coarse: int = 32
    n_fine_glass: int = 8
    n_fine_vi: int = 8
    epsilon: float = DEFAULT_EPSILON
    iterations: int = 5000
    lr_init: float = 5e-4
    lr_final: float = 5e-5
    scale_lr_by_batch: bool = True  # lr × rays_per_batch / 1024
    offset_warmup: int = 500  # 이 반복 수 동안 오프셋 헤드 고정 (0 이면 끔)
    offset_loss_scope: str = "both"
    offsets_in_coarse: bool = True
    perturb: bool = True
    white_background: bool = True
    disable_glass: bool = False
    disable_view_dependent: bool = False
    log_every: int = 50
    checkpoint_every: int = 1000
    seed: int = 0
    network: NetworkConfig = field(default_factory=NetworkConfig)

    def __post_init__(self):
        if isinstance(self.network, dict):
            self.network = NetworkConfig.from_dict(self.network)
        self.validate()

    def validate(self) -> None:
        if self.epsilon < 0:
            raise InputError(f"ε 는 0 이상이어야 합니다: {self.epsilon}")
        for name in ("rays_per_batch", "n_coarse", "log_every", "checkpoint_every"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} 는 1 이상이어야 합니다: {getattr(self, name)}")
        if self.n_coarse < 2:
            raise InputError(f"n_coarse 는 2 이상이어야 합니다: {self.n_coarse}")
        for name in ("iterations", "n_fine_glass", "n_fine_vi", "offset_warmup"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} 는 0 이상이어야 합니다: {getattr(self, name)}")
        if self.offset_loss_scope not in OFFSET_SCOPES:
            raise InputError(f"offset_loss_scope 는 {OFFSET_SCOPES} 중 하나: {self.offset_loss_scope}")

    @property
    def use_glass(self) -> bool:
        return not self.disable_glass

    @property
    def use_view_dependent(self) -> bool:
        return not self.disable_view_dependent

    @property
    def lr_scale(self) -> float:
        return self.rays_per_batch / REFERENCE_BATCH if self.scale_lr_by_batch else 1.0

    def render_config(self, chunk_size: int = 1024) -> RenderConfig:
        return RenderConfig(
            n_coarse=self.n_coarse,
            n_fine_glass=self.n_fine_glass,
            n_fine_vi=self.n_fine_vi,
            perturb=self.perturb,
            white_background=self.white_background,
            use_glass=self.use_glass,
            use_view_dependent=self.use_view_dependent,
            offsets_in_coarse=self.offsets_in_coarse,
            chunk_size=chunk_size,
        )

    def apply_ablation(self, name: Optional[str]) -> None:
        """vanilla: 유리·시점 의존 분기 모두 끔 / no-glass / no-vd"""
        if name in (None, "none"):
            return
        if name == "vanilla":
            self.disable_glass = True
            self.disable_view_dependent = True
        elif name == "no-glass":
            self.disable_glass = True
        elif name == "no-vd":
            self.disable_view_dependent = True
        else:
            raise InputError(f"알 수 없는 ablation: {name}")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "TrainConfig":
        data = dict(data)
        network = NetworkConfig.from_dict(data.pop("network", {}))
        return dataclass_from_dict(cls, {**data, "network": network})


@dataclass
class RunConfig:
    """TrainConfig + 경로, 스레드 수, 결정론 플래그"""

    train: TrainConfig
    dataset: str
    output_dir: str
    checkpoint: Optional[str] = None  # 이어서 학습할 체크포인트
    threads: int = 1
    deterministic: bool = False

    def __post_init__(self):
        if self.threads < 1:
            raise InputError(f"스레드 수는 1 이상이어야 합니다: {self.threads}")

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["train"] = self.train.to_dict()
        return out
