# cli_app/commands/train.py
import os

from cli_app.commands.common import add_threads_argument, resolve_threads, write_json
from src.trainer.config import RunConfig, TrainConfig
from src.trainer.trainer import Trainer
from src.utils.config import load_config_file, merge_config
from src.utils.data_loader import load_dataset
from src.utils.errors import NonFiniteLossError

DIAGNOSTICS_NAME = "diagnostics.json"

# (플래그, TrainConfig 필드, 타입)
OVERRIDES = [
    ("--iterations", "iterations", int),
    ("--rays-per-batch", "rays_per_batch", int),
    ("--n-coarse", "n_coarse", int),
    ("--n-fine-glass", "n_fine_glass", int),
    ("--n-fine-vi", "n_fine_vi", int),
    ("--epsilon", "epsilon", float),
    ("--lr-init", "lr_init", float),
    ("--lr-final", "lr_final", float),
    ("--offset-warmup", "offset_warmup", int),
    ("--log-every", "log_every", int),
    ("--checkpoint-every", "checkpoint_every", int),
    ("--seed", "seed", int),
]


def add_parser(subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help="유리 인식 NeRF 학습")
    parser.add_argument("--dataset", required=True, help="데이터셋 디렉터리 또는 transforms.json")
    parser.add_argument("--out", required=True, help="체크포인트/로그 출력 디렉터리")
    parser.add_argument("--config", default=None, help="설정 JSON ({\"train\": {...}})")
    parser.add_argument("--resume", default=None, help="이어서 학습할 체크포인트")
    parser.add_argument("--ablation", default=None, choices=["none", "vanilla", "no-glass", "no-vd"])
    parser.add_argument("--deterministic", action="store_true", help="wall time 을 metrics.csv 에서 분리")
    parser.add_argument("--no-perturb", dest="perturb", action="store_const", const=False, default=None)
    parser.add_argument(
        "--offset-loss-scope", dest="offset_loss_scope", default=None, choices=["both", "coarse", "fine"]
    )
    for flag, dest, kind in OVERRIDES:
        parser.add_argument(flag, dest=dest, type=kind, default=None)
    add_threads_argument(parser)


def build_run_config(args) -> RunConfig:
    """CLI 플래그 > 설정 파일 > 기본값"""
    file_config = load_config_file(args.config)
    cli_layer = {dest: getattr(args, dest) for _, dest, _ in OVERRIDES}
    cli_layer["perturb"] = args.perturb
    cli_layer["offset_loss_scope"] = args.offset_loss_scope
    merged = merge_config(TrainConfig().to_dict(), file_config.get("train"), cli_layer)
    train_cfg = TrainConfig.from_dict(merged)
    train_cfg.apply_ablation(args.ablation or file_config.get("ablation"))
    train_cfg.validate()
    return RunConfig(
        train=train_cfg,
        dataset=args.dataset,
        output_dir=args.out,
        checkpoint=args.resume,
        threads=resolve_threads(args),
        deterministic=bool(args.deterministic or file_config.get("deterministic", False)),
    )


def run(args) -> int:
    run_config = build_run_config(args)
    dataset = load_dataset(run_config.dataset)
    print(f"🚀 학습 시작: 뷰 {len(dataset.split('train'))} 장, 반복 {run_config.train.iterations}")

    trainer = Trainer(dataset, run_config)
    if run_config.checkpoint:
        trainer.resume(run_config.checkpoint)
        print(f"✅ 체크포인트에서 재개: iteration {trainer.iteration}")
    try:
        result = trainer.train(progress=True)
    except NonFiniteLossError as e:
        path = write_json(os.path.join(run_config.output_dir, DIAGNOSTICS_NAME), e.diagnostics)
        print(f"⚠️ 진단 정보 저장: {path}")
        raise

    if result.history:
        last = result.history[-1]
        print(f"✅ 학습 완료: loss={last.total_loss:.5f} (iteration {last.iteration})")
    else:
        print("✅ 학습할 반복이 없어 현재 상태만 저장했습니다")
    print(f"✅ 체크포인트: {result.checkpoint_path}")
    return 0
