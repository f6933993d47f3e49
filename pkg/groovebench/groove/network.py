"""
MLP 파라미터 초기화와 forward pass

encoder / decoder / PS 분류기 / imputer가 같은 블록을 쓴다:
    hidden 레이어마다 dense → (batchnorm) → relu, 마지막은 선형 레이어
"""
import logging
from typing import Dict, Optional, Sequence

import numpy as np

from groovebench.numerics.layers import RunningStats, dense_forward, batchnorm_forward
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import Tape, Node, relu

logger = logging.getLogger(__name__)


def init_mlp(params: Dict[str, np.ndarray], buffers: Dict[str, RunningStats], prefix: str,
             dims: Sequence[int], rng: RngStream, batchnorm: bool = True) -> None:
    """
    dims = [입력, hidden..., 출력] 에 맞춰 파라미터를 채운다

    가중치/편향은 U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    """
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        gen = rng.child(i).generator
        params[f"{prefix}.{i}.W"] = gen.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"{prefix}.{i}.b"] = gen.uniform(-bound, bound, size=(1, fan_out))
        is_hidden = i < len(dims) - 2
        if batchnorm and is_hidden:
            params[f"{prefix}.{i}.gamma"] = np.ones((1, fan_out))
            params[f"{prefix}.{i}.beta"] = np.zeros((1, fan_out))
            buffers[f"{prefix}.{i}"] = RunningStats.initial(fan_out)


def mlp_depth(params: Dict[str, np.ndarray], prefix: str) -> int:
    return sum(1 for name in params if name.startswith(prefix + '.') and name.endswith('.W'))


class ForwardPass:
    """
    테이프 하나 위의 forward 계산

    파라미터는 처음 쓰일 때 테이프에 등록된다. train 모드 batchnorm이 만든
    running stats는 self.buffers(작업 사본)에 쌓이고, commit 여부는 호출자가 정한다.
    """

    def __init__(self, params: Dict[str, np.ndarray], buffers: Dict[str, RunningStats],
                 tape: Optional[Tape] = None):
        self.params = params
        self.buffers = dict(buffers)
        self.tape = tape if tape is not None else Tape()

    def p(self, name: str) -> Node:
        return self.tape.param(name, self.params[name])

    def const(self, value) -> Node:
        return self.tape.constant(value)

    def mlp(self, prefix: str, x: Node, mode: str) -> Node:
        depth = mlp_depth(self.params, prefix)
        h = x
        for i in range(depth):
            h = dense_forward(self.tape, h, self.p(f"{prefix}.{i}.W"), self.p(f"{prefix}.{i}.b"))
            if i == depth - 1:
                break
            key = f"{prefix}.{i}"
            if key in self.buffers:
                h, self.buffers[key] = batchnorm_forward(
                    self.tape, h, self.p(f"{key}.gamma"), self.p(f"{key}.beta"),
                    self.buffers[key], mode)
            h = relu(self.tape, h)
        return h
