"""
신경망 레이어 (dense, batchnorm)

모든 레이어는 Tape 위에서 동작하며 forward 중간값을 backward용으로 잡아둔다.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from groovebench.exceptions import ShapeError, DegenerateBatchError, ParameterError
from groovebench.numerics.tape import Tape, Node, matmul, add, relu

logger = logging.getLogger(__name__)

BN_MOMENTUM = 0.1
BN_EPS = 1e-5


@dataclass(frozen=True)
class RunningStats:
    """batchnorm 이동 평균/분산"""
    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def initial(cls, width: int) -> 'RunningStats':
        return cls(np.zeros(width), np.ones(width))


def dense_forward(tape: Tape, x: Node, weights: Node, bias: Node, activation: str = 'identity') -> Node:
    """
    affine 변환 후 활성화

    Args:
        x: (n, k_in)
        weights: (k_in, k_out)
        bias: (1, k_out) 행 벡터
        activation: 'relu' | 'identity'
    """
    if x.value.shape[1] != weights.value.shape[0]:
        raise ShapeError(f"dense 입력 폭 {x.value.shape[1]} != 가중치 행 수 {weights.value.shape[0]}")
    if bias.value.shape[-1] != weights.value.shape[1]:
        raise ShapeError(f"bias 폭 {bias.value.shape} != 출력 폭 {weights.value.shape[1]}")

    out = add(tape, matmul(tape, x, weights), bias)
    if activation == 'relu':
        return relu(tape, out)
    if activation == 'identity':
        return out
    raise ParameterError(f"알 수 없는 활성화: {activation}")


def batchnorm_forward(tape: Tape, x: Node, gamma: Node, beta: Node,
                      running: RunningStats, mode: str = 'train') -> Tuple[Node, RunningStats]:
    """
    1D batch normalization

    train 모드는 배치 통계로 정규화하고 새 running stats를 돌려준다 (momentum 0.1).
    eval 모드는 running stats만 쓰며 입력 running을 그대로 돌려준다.

    Returns:
        (출력 노드, 갱신된 RunningStats)
    """
    xv = x.value
    n = xv.shape[0]
    gv = gamma.value.reshape(1, -1)

    if mode == 'train':
        if n < 2:
            raise DegenerateBatchError("train 모드 batchnorm은 배치 크기 2 이상이 필요합니다")
        mu = xv.mean(axis=0)
        var = xv.var(axis=0)
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        x_hat = (xv - mu) * inv_std
        out = x_hat * gv + beta.value.reshape(1, -1)

        def _back(g):
            dx_hat = g * gv
            dx = (inv_std / n) * (n * dx_hat - dx_hat.sum(axis=0) - x_hat * (dx_hat * x_hat).sum(axis=0))
            dgamma = (g * x_hat).sum(axis=0).reshape(gamma.value.shape)
            dbeta = g.sum(axis=0).reshape(beta.value.shape)
            return dx, dgamma, dbeta

        unbiased = var * n / (n - 1)
        updated = RunningStats(
            mean=(1.0 - BN_MOMENTUM) * running.mean + BN_MOMENTUM * mu,
            var=(1.0 - BN_MOMENTUM) * running.var + BN_MOMENTUM * unbiased,
        )
        return tape.record(out, (x, gamma, beta), _back), updated

    if mode == 'eval':
        inv_std = 1.0 / np.sqrt(running.var + BN_EPS)
        x_hat = (xv - running.mean) * inv_std
        out = x_hat * gv + beta.value.reshape(1, -1)

        def _back(g):
            dx = g * gv * inv_std
            dgamma = (g * x_hat).sum(axis=0).reshape(gamma.value.shape)
            dbeta = g.sum(axis=0).reshape(beta.value.shape)
            return dx, dgamma, dbeta

        return tape.record(out, (x, gamma, beta), _back), running

    raise ParameterError(f"알 수 없는 batchnorm 모드: {mode}")
