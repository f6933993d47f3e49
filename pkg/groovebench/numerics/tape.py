"""
역방향 자동미분 테이프

각 연산은 Node를 만들며 테이프에 순서대로 기록된다.
backward()는 기록을 역순으로 한 번씩 방문하며 gradient를 더해 나간다.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp as _logsumexp

from groovebench.exceptions import ContractError, ShapeError

logger = logging.getLogger(__name__)


class Node:
    """테이프에 기록된 값 하나"""

    __slots__ = ('value', 'parents', 'backward_fn', 'name', 'index')

    def __init__(self, value: np.ndarray, parents: Tuple['Node', ...] = (),
                 backward_fn: Optional[Callable] = None, name: Optional[str] = None):
        self.value = value
        self.parents = parents
        self.backward_fn = backward_fn
        self.name = name
        self.index = -1

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Node(name={self.name}, shape={self.value.shape})"


class Tape:
    """연산 기록"""

    def __init__(self):
        self.nodes: List[Node] = []
        self.params: Dict[str, Node] = {}

    def _push(self, node: Node) -> Node:
        node.index = len(self.nodes)
        self.nodes.append(node)
        return node

    def param(self, name: str, value: np.ndarray) -> Node:
        """미분 대상 파라미터 등록"""
        if name in self.params:
            return self.params[name]
        node = self._push(Node(np.asarray(value, dtype=np.float64), name=name))
        self.params[name] = node
        return node

    def constant(self, value) -> Node:
        return self._push(Node(np.asarray(value, dtype=np.float64)))

    def record(self, value: np.ndarray, parents: Sequence[Node], backward_fn: Callable) -> Node:
        return self._push(Node(value, tuple(parents), backward_fn))

    def as_node(self, x) -> Node:
        return x if isinstance(x, Node) else self.constant(x)


def backward(tape: Tape, loss: Node) -> Dict[str, np.ndarray]:
    """
    스칼라 loss에 대한 파라미터별 gradient

    loss에 닿지 않는 파라미터는 0 gradient.
    """
    if loss.value.size != 1:
        raise ContractError(f"loss는 스칼라여야 합니다 (shape={loss.value.shape})")

    grads: Dict[int, np.ndarray] = {loss.index: np.ones_like(loss.value)}
    for node in reversed(tape.nodes[:loss.index + 1]):
        g = grads.pop(node.index, None)
        if g is None or node.backward_fn is None:
            if node.name is not None and g is not None:
                grads[node.index] = g
            continue
        parent_grads = node.backward_fn(g)
        for parent, pg in zip(node.parents, parent_grads):
            if pg is None:
                continue
            if parent.index in grads:
                grads[parent.index] = grads[parent.index] + pg
            else:
                grads[parent.index] = pg

    result = {}
    for name, node in tape.params.items():
        g = grads.get(node.index)
        result[name] = np.zeros_like(node.value) if g is None else g
    return result


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """브로드캐스트된 축을 합쳐 원래 shape로"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ---- 기본 연산 ----

def matmul(tape: Tape, a: Node, b: Node) -> Node:
    if a.value.shape[-1] != b.value.shape[0]:
        raise ShapeError(f"matmul 차원 불일치: {a.value.shape} @ {b.value.shape}")
    av, bv = a.value, b.value
    return tape.record(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def add(tape: Tape, a: Node, b: Node) -> Node:
    sa, sb = a.value.shape, b.value.shape
    return tape.record(a.value + b.value, (a, b),
                       lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(tape: Tape, a: Node, b: Node) -> Node:
    sa, sb = a.value.shape, b.value.shape
    return tape.record(a.value - b.value, (a, b),
                       lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(tape: Tape, a: Node, b: Node) -> Node:
    av, bv = a.value, b.value
    return tape.record(av * bv, (a, b),
                       lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)))


def div(tape: Tape, a: Node, b: Node) -> Node:
    av, bv = a.value, b.value
    out = av / bv
    return tape.record(out, (a, b),
                       lambda g: (_unbroadcast(g / bv, av.shape),
                                  _unbroadcast(-g * out / bv, bv.shape)))


def scale(tape: Tape, a: Node, c: float) -> Node:
    return tape.record(a.value * c, (a,), lambda g: (g * c,))


def add_const(tape: Tape, a: Node, c) -> Node:
    return tape.record(a.value + c, (a,), lambda g: (g,))


def relu(tape: Tape, a: Node) -> Node:
    mask = a.value > 0
    return tape.record(a.value * mask, (a,), lambda g: (g * mask,))


def exp(tape: Tape, a: Node) -> Node:
    out = np.exp(a.value)
    return tape.record(out, (a,), lambda g: (g * out,))


def log(tape: Tape, a: Node) -> Node:
    av = a.value
    return tape.record(np.log(av), (a,), lambda g: (g / av,))


def sqrt(tape: Tape, a: Node) -> Node:
    out = np.sqrt(a.value)
    return tape.record(out, (a,), lambda g: (g * 0.5 / out,))


def square(tape: Tape, a: Node) -> Node:
    av = a.value
    return tape.record(av * av, (a,), lambda g: (2.0 * g * av,))


def power(tape: Tape, a: Node, p: float) -> Node:
    av = a.value
    out = av ** p
    return tape.record(out, (a,), lambda g: (g * p * av ** (p - 1.0),))


def sum_(tape: Tape, a: Node, axis: Optional[int] = None, keepdims: bool = False) -> Node:
    shape = a.value.shape
    out = a.value.sum(axis=axis, keepdims=keepdims)

    def _back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return tape.record(np.asarray(out, dtype=np.float64), (a,), _back)


def mean(tape: Tape, a: Node, axis: Optional[int] = None, keepdims: bool = False) -> Node:
    count = a.value.size if axis is None else a.value.shape[axis]
    return scale(tape, sum_(tape, a, axis=axis, keepdims=keepdims), 1.0 / count)


def transpose(tape: Tape, a: Node) -> Node:
    return tape.record(a.value.T, (a,), lambda g: (g.T,))


def slice_cols(tape: Tape, a: Node, start: int, stop: int) -> Node:
    shape = a.value.shape

    def _back(g):
        full = np.zeros(shape)
        full[:, start:stop] = g
        return (full,)

    return tape.record(a.value[:, start:stop], (a,), _back)


def logsumexp(tape: Tape, a: Node, axis: int = 1, mask: Optional[np.ndarray] = None) -> Node:
    """
    축 방향 log-sum-exp (최댓값 빼기로 안정화)

    mask가 주어지면 False 위치는 합에서 제외한다.
    """
    av = a.value
    masked = av if mask is None else np.where(mask, av, -np.inf)
    out = _logsumexp(masked, axis=axis)

    def _back(g):
        weights = np.exp(masked - np.expand_dims(out, axis))
        return (weights * np.expand_dims(g, axis),)

    return tape.record(out, (a,), _back)


def pairwise_sqdist(tape: Tape, a: Node, b: Node) -> Node:
    """행 쌍별 제곱 유클리드 거리 (n1 x n2)"""
    av, bv = a.value, b.value
    if av.shape[1] != bv.shape[1]:
        raise ShapeError(f"pairwise 거리 폭 불일치: {av.shape} vs {bv.shape}")
    out = (av * av).sum(axis=1)[:, None] + (bv * bv).sum(axis=1)[None, :] - 2.0 * av @ bv.T
    out = np.maximum(out, 0.0)

    def _back(g):
        ga = 2.0 * (g.sum(axis=1)[:, None] * av - g @ bv)
        gb = 2.0 * (g.sum(axis=0)[:, None] * bv - g.T @ av)
        return ga, gb

    return tape.record(out, (a, b), _back)


def mse(tape: Tape, target: Node, pred: Node) -> Node:
    """전체 원소 평균 제곱오차"""
    return mean(tape, square(tape, sub(tape, pred, target)))
