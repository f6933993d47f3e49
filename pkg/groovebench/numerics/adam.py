"""Adam 옵티마이저"""
import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from groovebench.config import ADAM_CONFIG
from groovebench.exceptions import ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """파라미터별 1차/2차 모멘트와 스텝 카운터"""
    learning_rate: float = ADAM_CONFIG['learning_rate']
    beta1: float = ADAM_CONFIG['beta1']
    beta2: float = ADAM_CONFIG['beta2']
    eps: float = ADAM_CONFIG['eps']
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(state: AdamState, params: Dict[str, np.ndarray],
              grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """
    bias 보정 Adam 업데이트 한 번

    Returns:
        새 파라미터 dict (입력 배열은 수정하지 않음)
    """
    for name, p in params.items():
        g = grads.get(name)
        if g is not None and g.shape != p.shape:
            raise ShapeError(f"{name}: gradient shape {g.shape} != 파라미터 shape {p.shape}")
        if name in state.m and state.m[name].shape != p.shape:
            raise ShapeError(f"{name}: 모멘트 shape {state.m[name].shape} != 파라미터 shape {p.shape}")

    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t

    updated = {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        m = b1 * state.m.get(name, np.zeros_like(p)) + (1.0 - b1) * g
        v = b2 * state.v.get(name, np.zeros_like(p)) + (1.0 - b2) * g * g
        state.m[name] = m
        state.v[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return updated
