# -*- coding: utf-8 -*-
from src.trainer.config import RunConfig, TrainConfig
from src.trainer.losses import offset_loss, render_loss, total_loss
from src.trainer.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from src.trainer.trainer import StepResult, Trainer, TrainResult, build_model_from_checkpoint, train
