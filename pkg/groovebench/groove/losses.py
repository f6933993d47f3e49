"""
GROOVE 손실 함수

- GroupCLIP: 같은 라벨의 반대 모달리티 샘플을 positive로 하는 대조 손실
- reconstruction: 모달리티 내 encode → decode 오차
- backtranslation: m → m̄ 생성(eval, no-grad) 후 재인코딩해서 m으로 복원
"""
import logging
from typing import Optional, Tuple

import numpy as np

from groovebench.exceptions import (
    MissingPositivesError, UndefinedSimilarityError, ParameterError, ContractError,
)
from groovebench.groove.model import GrooveModel, encode_node, decode_node
from groovebench.groove.network import ForwardPass
from groovebench.numerics.matrix import as_matrix
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import (
    Tape, Node, add, sub, mul, div, scale, add_const, log, sqrt, square, power,
    sum_, mean, matmul, transpose, logsumexp, pairwise_sqdist, mse,
)

logger = logging.getLogger(__name__)


def similarity(kind: str, a, b, tau: float = 0.2, eta: float = 1.0) -> float:
    """
    두 벡터의 유사도

    cosine: <a,b> / (|a||b|), [-1, 1]
    tdist:  (1 + |a-b|^2 / (tau*eta))^(-(eta+1)/2), (0, 1]
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ParameterError(f"벡터 길이 불일치: {a.shape} vs {b.shape}")
    if kind == 'cosine':
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            raise UndefinedSimilarityError("영벡터의 cosine 유사도는 정의되지 않습니다")
        return float(np.clip(a @ b / (na * nb), -1.0, 1.0))
    if kind == 'tdist':
        d2 = float(np.sum((a - b) ** 2))
        return float((1.0 + d2 / (tau * eta)) ** (-(eta + 1.0) / 2.0))
    raise ParameterError(f"알 수 없는 커널: {kind}")


def _positive_mask(labels1, labels2) -> np.ndarray:
    labels1 = np.asarray(labels1)
    labels2 = np.asarray(labels2)
    for label in np.unique(labels1):
        if not np.any(labels2 == label):
            raise MissingPositivesError(int(label))
    for label in np.unique(labels2):
        if not np.any(labels1 == label):
            raise MissingPositivesError(int(label))
    return labels1[:, None] == labels2[None, :]


def _unit_rows(tape: Tape, z: Node) -> Node:
    norms = sqrt(tape, sum_(tape, square(tape, z), axis=1, keepdims=True))
    if np.any(norms.value == 0):
        raise UndefinedSimilarityError("임베딩에 영벡터가 있어 cosine 커널을 쓸 수 없습니다")
    return div(tape, z, norms)


def groupclip_node(tape: Tape, z1: Node, z2: Node, labels1, labels2,
                   kernel: str = 'cosine', tau: float = 0.2, eta: float = 1.0) -> Node:
    """
    양방향 GroupCLIP

    앵커별 l_i = -log( sum_{positive} k / sum_{전체 후보} k ),
    두 방향의 앵커 평균을 다시 평균낸다. 후보는 반대 모달리티 배치 전체.
    """
    pos = _positive_mask(labels1, labels2)

    if kernel == 'cosine':
        logits = scale(tape, matmul(tape, _unit_rows(tape, z1), transpose(tape, _unit_rows(tape, z2))), 1.0 / tau)
        logits_t = transpose(tape, logits)
        l1 = sub(tape, logsumexp(tape, logits, axis=1), logsumexp(tape, logits, axis=1, mask=pos))
        l2 = sub(tape, logsumexp(tape, logits_t, axis=1), logsumexp(tape, logits_t, axis=1, mask=pos.T))
    elif kernel == 'tdist':
        # 커널이 이미 (0, 1]이라 exp 변환 없이 합을 쓴다
        dist = pairwise_sqdist(tape, z1, z2)
        k = power(tape, add_const(tape, scale(tape, dist, 1.0 / (tau * eta)), 1.0), -(eta + 1.0) / 2.0)
        k_t = transpose(tape, k)
        pos_node = tape.constant(pos.astype(np.float64))
        pos_t = tape.constant(pos.T.astype(np.float64))
        l1 = sub(tape, log(tape, sum_(tape, k, axis=1)), log(tape, sum_(tape, mul(tape, k, pos_node), axis=1)))
        l2 = sub(tape, log(tape, sum_(tape, k_t, axis=1)), log(tape, sum_(tape, mul(tape, k_t, pos_t), axis=1)))
    else:
        raise ParameterError(f"알 수 없는 커널: {kernel}")

    return scale(tape, add(tape, mean(tape, l1), mean(tape, l2)), 0.5)


def groupclip_loss(Z1, Z2, labels1, labels2, kernel: str = 'cosine',
                   tau: float = 0.2, eta: float = 1.0) -> float:
    tape = Tape()
    node = groupclip_node(tape, tape.constant(as_matrix(Z1)), tape.constant(as_matrix(Z2)),
                          labels1, labels2, kernel, tau, eta)
    return float(node.value)


def reconstruction_node(fp: ForwardPass, model: GrooveModel, x1: Node, x2: Node, mode: str,
                        rng: Optional[RngStream] = None) -> Tuple[Node, Node, Node]:
    """
    모달리티별 MSE의 평균

    Returns:
        (loss, z1, z2) - step 1에서 GroupCLIP이 같은 z를 쓴다
    """
    if x1.value.shape[0] == 0 or x2.value.shape[0] == 0:
        raise ContractError("reconstruction 배치가 비어 있습니다")
    tape = fp.tape
    z1 = encode_node(fp, model, x1, 1, mode, rng)
    z2 = encode_node(fp, model, x2, 2, mode, rng)
    r1 = mse(tape, x1, decode_node(fp, model, z1, 1, mode))
    r2 = mse(tape, x2, decode_node(fp, model, z2, 2, mode))
    return scale(tape, add(tape, r1, r2), 0.5), z1, z2


def reconstruction_loss(model: GrooveModel, x1, x2, mode: str = 'eval',
                        rng: Optional[RngStream] = None) -> float:
    fp = ForwardPass(model.params, model.buffers)
    loss, _, _ = reconstruction_node(fp, model, fp.const(as_matrix(x1)), fp.const(as_matrix(x2)), mode, rng)
    return float(loss.value)


def translate(model: GrooveModel, x: np.ndarray, source: int) -> np.ndarray:
    """eval 모드 교차 생성 x^(m→m̄), 테이프에 남지 않는다"""
    target = 3 - source
    gen = ForwardPass(model.params, model.buffers)
    z = encode_node(gen, model, gen.const(x), source, 'eval')
    return decode_node(gen, model, z, target, 'eval').value


def backtranslation_node(fp: ForwardPass, model: GrooveModel, x1: np.ndarray, x2: np.ndarray,
                         rng: RngStream, generator: Optional[GrooveModel] = None) -> Node:
    """
    on-the-fly backtranslation 손실

    생성 단계는 generator(기본: model 자신)의 eval 모드로 별도 계산해 상수로 넣으므로
    생성에만 쓰인 경로로는 gradient가 흐르지 않는다. 재인코딩/복원은 train 모드.
    """
    generator = generator or model
    x12 = translate(generator, x1, 1)
    x21 = translate(generator, x2, 2)

    tape = fp.tape
    z12 = encode_node(fp, model, fp.const(x12), 2, 'train', rng)
    z21 = encode_node(fp, model, fp.const(x21), 1, 'train', rng)
    x121 = decode_node(fp, model, z12, 1, 'train')
    x212 = decode_node(fp, model, z21, 2, 'train')
    loss = add(tape, mse(tape, fp.const(x1), x121), mse(tape, fp.const(x2), x212))
    return scale(tape, loss, 0.5)


def backtranslation_step(model: GrooveModel, x1, x2, rng: RngStream) -> float:
    fp = ForwardPass(model.params, model.buffers)
    return float(backtranslation_node(fp, model, as_matrix(x1), as_matrix(x2), rng).value)
