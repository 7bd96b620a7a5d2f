# cli_app/commands/common.py
import argparse
import json
import os
from typing import Dict

from src.renderer.pipeline import GlassNerfRenderer
from src.trainer.checkpoint import load_checkpoint
from src.trainer.trainer import build_model_from_checkpoint
from src.utils.config import default_threads

DEFAULT_CHUNK = 2048


def add_threads_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=None, help="작업 스레드 수 (기본: GLASSNERF_THREADS 또는 1)")


def resolve_threads(args) -> int:
    return args.threads if args.threads is not None else default_threads()


def load_renderer(checkpoint_path: str, chunk_size: int = DEFAULT_CHUNK):
    """체크포인트의 설정으로 모델과 렌더러를 만든다. (renderer, checkpoint.config)"""
    checkpoint = load_checkpoint(checkpoint_path)
    model, train_cfg = build_model_from_checkpoint(checkpoint)
    renderer = GlassNerfRenderer(model, train_cfg.render_config(chunk_size))
    return renderer, checkpoint.config


def write_json(path: str, data: Dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
    return path
