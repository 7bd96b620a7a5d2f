# src/autodiff/gradcheck.py
"""중심 차분으로 해석적 기울기를 검증하는 도구"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from src.autodiff.tensor import Tensor


@dataclass
class GradientMismatch:
    name: str
    index: tuple
    analytic: float
    numeric: float


def numerical_gradient(
    loss_fn: Callable[[], Tensor], param: Tensor, index: tuple, step: float = 1e-4
) -> float:
    original = param.data[index].copy()
    param.data[index] = original + step
    plus = loss_fn().item()
    param.data[index] = original - step
    minus = loss_fn().item()
    param.data[index] = original
    return (plus - minus) / (2.0 * step)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Dict[str, Tensor],
    step: float = 1e-4,
    rtol: float = 1e-4,
    atol: float = 1e-6,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> List[GradientMismatch]:
    """
    loss_fn 의 해석적 기울기와 중심 차분을 비교해 허용 오차를 넘는 항목을 돌려준다.
    max_entries 를 주면 파라미터마다 그만큼만 무작위로 검사한다.
    """
    for p in params.values():
        p.zero_grad()
    loss_fn().backward()
    analytic = {n: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                for n, p in params.items()}

    rng = np.random.default_rng(seed)
    mismatches: List[GradientMismatch] = []
    for name, param in params.items():
        indices = list(np.ndindex(*param.shape)) if param.ndim else [()]
        if max_entries is not None and len(indices) > max_entries:
            chosen = rng.choice(len(indices), size=max_entries, replace=False)
            indices = [indices[i] for i in sorted(chosen)]
        for index in indices:
            numeric = numerical_gradient(loss_fn, param, index, step)
            exact = float(analytic[name][index])
            if abs(exact - numeric) > max(atol, rtol * max(abs(exact), abs(numeric))):
                mismatches.append(GradientMismatch(name, index, exact, numeric))
    return mismatches
