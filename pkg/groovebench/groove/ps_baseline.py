"""
Propensity score(PS) 베이스라인

모달리티마다 라벨 분류기를 따로 학습하고 softmax 이전 logit을 표현으로 쓴다.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from groovebench.config import PS_CONFIG
from groovebench.exceptions import DegenerateClassificationError
from groovebench.groove.network import ForwardPass, init_mlp
from groovebench.numerics.adam import AdamState, adam_step
from groovebench.numerics.layers import RunningStats
from groovebench.numerics.matrix import as_matrix, check_width
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import backward, logsumexp, mean, sub
from groovebench.utils.dataset_io import Dataset

logger = logging.getLogger(__name__)


class PSConfig(BaseModel):
    hidden: Tuple[int, ...] = PS_CONFIG['hidden']
    learning_rate: float = Field(PS_CONFIG['learning_rate'], gt=0)
    iterations: int = Field(PS_CONFIG['iterations'], ge=0)
    batch_size: int = Field(PS_CONFIG['batch_size'], ge=2)
    seed: int = 0


@dataclass
class PSBaseline:
    """학습된 모달리티별 분류기 + 학습 데이터 표현"""
    classes: np.ndarray
    widths: Tuple[int, int]
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    buffers: Dict[str, RunningStats] = field(default_factory=dict)
    representations: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def embed(self, x, modality: int) -> np.ndarray:
        """eval 모드 logit (폭 = 클래스 수)"""
        x = as_matrix(x)
        check_width(x, self.widths[modality - 1], f"modality {modality} 입력")
        fp = ForwardPass(self.params, self.buffers)
        return fp.mlp(f"clf{modality}", fp.const(x), 'eval').value

    def accuracy(self, x, labels, modality: int) -> float:
        predicted = self.classes[np.argmax(self.embed(x, modality), axis=1)]
        return float(np.mean(predicted == np.asarray(labels)))


def _cross_entropy(fp: ForwardPass, logits, targets: np.ndarray):
    onehot = np.zeros(logits.value.shape, dtype=bool)
    onehot[np.arange(targets.size), targets] = True
    tape = fp.tape
    # 원소 하나만 남긴 logsumexp = 정답 logit
    return mean(tape, sub(tape, logsumexp(tape, logits, axis=1), logsumexp(tape, logits, axis=1, mask=onehot)))


def _train_classifier(model: PSBaseline, modality: int, X: np.ndarray, targets: np.ndarray,
                      config: PSConfig, rng: RngStream):
    state = AdamState(learning_rate=config.learning_rate)
    prefix = f"clf{modality}"
    names = [name for name in model.params if name.startswith(prefix + '.')]
    batch = min(config.batch_size, X.shape[0])

    for iteration in range(config.iterations):
        idx = rng.generator.choice(X.shape[0], size=batch, replace=False)
        fp = ForwardPass(model.params, model.buffers)
        logits = fp.mlp(prefix, fp.const(X[idx]), 'train')
        loss = _cross_entropy(fp, logits, targets[idx])
        grads = backward(fp.tape, loss)
        subset = {name: model.params[name] for name in names}
        model.params.update(adam_step(state, subset, grads))
        model.buffers = fp.buffers
        if (iteration + 1) % 200 == 0:
            logger.debug(f"PS modality {modality} 반복 {iteration + 1}: loss={float(loss.value):.4f}")


def train_ps_baseline(dataset: Dataset, config: Optional[PSConfig] = None) -> PSBaseline:
    """
    모달리티별 분류기 학습

    Returns:
        PSBaseline (representations = 학습 데이터의 모달리티별 logit 행렬)
    """
    config = config or PSConfig()
    classes = np.union1d(np.unique(dataset.labels_x), np.unique(dataset.labels_y))
    if classes.size < 2:
        raise DegenerateClassificationError("라벨이 1개뿐이라 PS 분류기를 학습할 수 없습니다")

    model = PSBaseline(classes, (dataset.X.shape[1], dataset.Y.shape[1]))
    rng = RngStream(config.seed, key=(41,))
    for modality, X, labels in ((1, dataset.X, dataset.labels_x), (2, dataset.Y, dataset.labels_y)):
        dims = [X.shape[1], *config.hidden, classes.size]
        init_mlp(model.params, model.buffers, f"clf{modality}", dims, rng.child(modality))
        targets = np.searchsorted(classes, labels)
        logger.info(f"PS modality {modality} 분류기 학습 시작 (클래스 {classes.size}개)")
        _train_classifier(model, modality, X, targets, config, rng.child(10 + modality))

    model.representations = (model.embed(dataset.X, 1), model.embed(dataset.Y, 2))
    return model
