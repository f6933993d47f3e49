"""
transport plan 기반 교차 모달리티 imputation

plan은 (타깃 샘플 × 소스 샘플) 방향이다. 미니배치의 소스 샘플 i는
정규화한 plan 열 T[:, i]에서 타깃 j를 뽑고, X_src[i] → X_tgt[j]를 MSE로 회귀한다.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from groovebench.config import IMPUTER_CONFIG
from groovebench.exceptions import DegenerateColumnError, DivergenceError, ShapeError
from groovebench.groove.network import ForwardPass, init_mlp
from groovebench.numerics.adam import AdamState, adam_step
from groovebench.numerics.matrix import as_matrix, check_width
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import backward, mse
from groovebench.ot_align.plan import TransportPlan

logger = logging.getLogger(__name__)


class ImputerConfig(BaseModel):
    hidden: Tuple[int, ...] = IMPUTER_CONFIG['hidden']
    learning_rate: float = Field(IMPUTER_CONFIG['learning_rate'], gt=0)
    iterations: int = Field(IMPUTER_CONFIG['iterations'], ge=0)
    batch_size: int = Field(IMPUTER_CONFIG['batch_size'], ge=1)
    seed: int = 0


@dataclass
class ImputerModel:
    """hidden relu 레이어 + 선형 출력 (batchnorm 없음)"""
    config: ImputerConfig
    widths: Tuple[int, int]
    params: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def source_width(self) -> int:
        return self.widths[0]

    @property
    def target_width(self) -> int:
        return self.widths[1]


def _coupling(plan: Union[TransportPlan, np.ndarray]) -> np.ndarray:
    return plan.coupling if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=np.float64)


def draw_plan_targets(plan, source_indices: np.ndarray, rng: RngStream) -> np.ndarray:
    """
    소스 샘플마다 plan 열 분포에서 타깃 인덱스 하나씩

    Raises:
        DegenerateColumnError: 뽑으려는 열의 합이 0
    """
    T = _coupling(plan)
    columns = T[:, source_indices]
    totals = columns.sum(axis=0)
    bad = np.flatnonzero(~(totals > 0))
    if bad.size:
        raise DegenerateColumnError(int(source_indices[bad[0]]))

    cdf = np.cumsum(columns / totals, axis=0)
    u = rng.generator.random(len(source_indices))
    picks = np.array([np.searchsorted(cdf[:, c], u[c], side='right') for c in range(cdf.shape[1])])
    return np.minimum(picks, T.shape[0] - 1)


def init_imputer(k_src: int, k_tgt: int, config: Optional[ImputerConfig] = None) -> ImputerModel:
    config = config or ImputerConfig()
    model = ImputerModel(config, (k_src, k_tgt))
    init_mlp(model.params, {}, "imp", [k_src, *config.hidden, k_tgt],
             RngStream(config.seed, key=(43,)), batchnorm=False)
    return model


def train_imputer(plan, X_src, X_tgt, config: Optional[ImputerConfig] = None,
                  rng: Optional[RngStream] = None) -> ImputerModel:
    """
    Args:
        plan: n_tgt×n_src TransportPlan 또는 행렬
        X_src: 소스 모달리티 (n_src×k_src)
        X_tgt: 타깃 모달리티 (n_tgt×k_tgt)
        config: imputer 설정
        rng: 배치/타깃 추출용 (None이면 config.seed에서)

    Raises:
        ShapeError: plan 크기와 데이터 행 수 불일치
        DegenerateColumnError: 합이 0인 plan 열
    """
    config = config or ImputerConfig()
    rng = rng or RngStream(config.seed, key=(47,))
    X_src = as_matrix(X_src, "X_src")
    X_tgt = as_matrix(X_tgt, "X_tgt")
    T = _coupling(plan)
    if T.shape != (X_tgt.shape[0], X_src.shape[0]):
        raise ShapeError(f"plan {T.shape}이 (타깃 {X_tgt.shape[0]}, 소스 {X_src.shape[0]})과 맞지 않습니다")
    empty = np.flatnonzero(~(T.sum(axis=0) > 0))
    if empty.size:
        raise DegenerateColumnError(int(empty[0]))

    model = init_imputer(X_src.shape[1], X_tgt.shape[1], config)
    state = AdamState(learning_rate=config.learning_rate)
    batch = min(config.batch_size, X_src.shape[0])
    logger.info(f"imputer 학습 시작 ({X_src.shape[1]} → {X_tgt.shape[1]}, 반복 {config.iterations})")

    for iteration in range(config.iterations):
        idx = rng.generator.choice(X_src.shape[0], size=batch, replace=False)
        targets = draw_plan_targets(T, idx, rng)
        fp = ForwardPass(model.params, {})
        pred = fp.mlp("imp", fp.const(X_src[idx]), 'train')
        loss = mse(fp.tape, fp.const(X_tgt[targets]), pred)
        if not np.isfinite(loss.value):
            raise DivergenceError(iteration, float(loss.value))
        model.params = adam_step(state, model.params, backward(fp.tape, loss))
        if (iteration + 1) % 200 == 0:
            logger.debug(f"imputer 반복 {iteration + 1}: mse={float(loss.value):.4f}")

    return model


def impute(model: ImputerModel, X_src) -> np.ndarray:
    """eval forward - 같은 입력이면 항상 같은 출력"""
    X_src = as_matrix(X_src, "X_src")
    check_width(X_src, model.source_width, "X_src")
    fp = ForwardPass(model.params, {})
    return fp.mlp("imp", fp.const(X_src), 'eval').value
