# -*- coding: utf-8 -*-
from src.autodiff.tensor import Tensor, no_grad, set_default_dtype, get_default_dtype
from src.autodiff.optimizer import Adam, ExponentialDecay, OptimizerState, optimizer_step
