# src/autodiff/optimizer.py
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from src.autodiff.tensor import Tensor
from src.utils.errors import InputError, MissingGradientError


@dataclass
class OptimizerState:
    """파라미터별 1차/2차 모멘트와 스텝 카운터"""

    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


class ExponentialDecay:
    """lr_init 에서 lr_final 까지 total_steps 동안 지수적으로 감소하는 학습률"""

    def __init__(self, lr_init: float = 5e-4, lr_final: float = 5e-5, total_steps: int = 200000):
        if lr_init <= 0 or lr_final <= 0:
            raise InputError(f"학습률은 양수여야 합니다: {lr_init}, {lr_final}")
        self.lr_init = lr_init
        self.lr_final = lr_final
        self.total_steps = max(int(total_steps), 1)

    def __call__(self, iteration: int) -> float:
        progress = min(max(iteration, 0), self.total_steps) / self.total_steps
        return float(self.lr_init * (self.lr_final / self.lr_init) ** progress)


class Adam:
    """적응적 모멘트 추정(Adam) 옵티마이저"""

    def __init__(
        self,
        params: Dict[str, Tensor],
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        state: Optional[OptimizerState] = None,
    ):
        self.params = dict(params)
        self.betas = betas
        self.eps = eps
        self.state = state if state is not None else OptimizerState()
        for name, p in self.params.items():
            self.state.first_moment.setdefault(name, np.zeros_like(p.data))
            self.state.second_moment.setdefault(name, np.zeros_like(p.data))

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self, learning_rate: float, frozen: Iterable[str] = ()) -> None:
        """기울기로 파라미터를 갱신. 기울기는 그대로 둔다 (호출자가 zero_grad)"""
        frozen = set(frozen)
        missing = [n for n, p in self.params.items() if n not in frozen and p.grad is None]
        if missing:
            raise MissingGradientError(f"기울기가 없는 파라미터: {missing[:5]}")

        beta1, beta2 = self.betas
        self.state.step += 1
        t = self.state.step
        correction1 = 1.0 - beta1 ** t
        correction2 = 1.0 - beta2 ** t

        for name, param in self.params.items():
            if name in frozen:
                continue
            grad = param.grad
            m = self.state.first_moment[name]
            v = self.state.second_moment[name]
            m *= beta1
            m += (1.0 - beta1) * grad
            v *= beta2
            v += (1.0 - beta2) * grad * grad
            m_hat = m / correction1
            v_hat = v / correction2
            param.data -= (learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)).astype(param.dtype)

    def state_dict(self) -> Dict:
        return {
            "step": self.state.step,
            "first_moment": {n: m.copy() for n, m in self.state.first_moment.items()},
            "second_moment": {n: v.copy() for n, v in self.state.second_moment.items()},
        }

    def load_state_dict(self, state: Dict) -> None:
        for key in ("first_moment", "second_moment"):
            for name in self.params:
                if name not in state[key]:
                    raise InputError(f"옵티마이저 상태에 {name} 이(가) 없습니다")
                if state[key][name].shape != self.params[name].shape:
                    raise InputError(f"옵티마이저 상태 모양 불일치: {name}")
        self.state = OptimizerState(
            first_moment={n: np.array(state["first_moment"][n]) for n in self.params},
            second_moment={n: np.array(state["second_moment"][n]) for n in self.params},
            step=int(state["step"]),
        )


def optimizer_step(params: Dict[str, Tensor], state: OptimizerState, learning_rate: float) -> None:
    """함수형 진입점: 주어진 상태로 Adam 한 스텝"""
    Adam(params, state=state).step(learning_rate)
