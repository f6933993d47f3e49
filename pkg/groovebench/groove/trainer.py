"""
GROOVE 학습 루프

반복마다
    Step 1: alpha * GroupCLIP + beta * reconstruction → optimizer 업데이트 1회
    Step 2: beta * backtranslation → optimizer 업데이트 1회
ablation:
    no_groupclip      - Step 1에서 GroupCLIP 항 제거
    autoencoder_only  - 추가로 Step 2 생략
beta = 0이면 Step 2는 업데이트 없이 건너뛴다.
"""
import csv
import logging
from dataclasses import dataclass, asdict
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from groovebench.config import TRAIN_CONFIG
from groovebench.exceptions import DivergenceError
from groovebench.groove.losses import groupclip_node, reconstruction_node, backtranslation_node
from groovebench.groove.model import GrooveModel
from groovebench.groove.network import ForwardPass
from groovebench.groove.sampler import plan_balanced_batches
from groovebench.numerics.adam import AdamState, adam_step
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import add, scale, backward
from groovebench.utils.dataset_io import Dataset

logger = logging.getLogger(__name__)

ABLATIONS = ('full', 'no_groupclip', 'autoencoder_only')


class TrainConfig(BaseModel):
    batch_size: int = Field(TRAIN_CONFIG['batch_size'], ge=2)
    iterations: int = Field(TRAIN_CONFIG['iterations'], ge=0)
    learning_rate: float = Field(TRAIN_CONFIG['learning_rate'], gt=0)
    seed: int = 0
    ablation: Literal['full', 'no_groupclip', 'autoencoder_only'] = TRAIN_CONFIG['ablation']
    log_every: int = Field(100, ge=1)


@dataclass
class LossRecord:
    iteration: int
    groupclip: float
    reconstruction: float
    step1: float
    backtranslation: float


def _check_finite(iteration: int, value: float):
    if not np.isfinite(value):
        raise DivergenceError(iteration, value)


def train_step(model: GrooveModel, state: AdamState, x1: np.ndarray, x2: np.ndarray,
               labels1: np.ndarray, labels2: np.ndarray, config: TrainConfig,
               rng: RngStream, iteration: int = 0) -> LossRecord:
    """Step 1 + (ablation에 따라) Step 2, 모델 파라미터/버퍼를 제자리 갱신"""
    hyper = model.hyper
    use_groupclip = config.ablation == 'full'

    fp = ForwardPass(model.params, model.buffers)
    tape = fp.tape
    recon, z1, z2 = reconstruction_node(fp, model, fp.const(x1), fp.const(x2), 'train', rng)
    loss1 = scale(tape, recon, hyper.beta)
    gclip_value = float('nan')
    if use_groupclip:
        gclip = groupclip_node(tape, z1, z2, labels1, labels2, hyper.kernel, hyper.tau, hyper.eta)
        gclip_value = float(gclip.value)
        loss1 = add(tape, loss1, scale(tape, gclip, hyper.alpha))
    _check_finite(iteration, float(loss1.value))

    grads = backward(tape, loss1)
    model.params = adam_step(state, model.params, grads)
    model.buffers = fp.buffers

    bt_value = float('nan')
    if config.ablation != 'autoencoder_only' and hyper.beta > 0:
        fp2 = ForwardPass(model.params, model.buffers)
        bt = backtranslation_node(fp2, model, x1, x2, rng)
        bt_value = float(bt.value)
        _check_finite(iteration, bt_value)
        loss2 = scale(fp2.tape, bt, hyper.beta)
        grads = backward(fp2.tape, loss2)
        model.params = adam_step(state, model.params, grads)
        model.buffers = fp2.buffers

    return LossRecord(iteration, gclip_value, float(recon.value), float(loss1.value), bt_value)


def train(model: GrooveModel, dataset: Dataset, config: Optional[TrainConfig] = None,
          history_path: Optional[str] = None) -> Tuple[GrooveModel, List[LossRecord]]:
    """
    GROOVE 학습

    Args:
        model: init_model()로 만든 모델 (제자리 갱신 후 그대로 반환)
        dataset: X(모달리티 1), Y(모달리티 2)와 라벨
        config: 학습 설정
        history_path: 반복별 손실을 TSV로 남길 경로

    Returns:
        (모델, 손실 기록)
    """
    config = config or TrainConfig()
    plan = plan_balanced_batches(dataset.labels_x, dataset.labels_y, config.batch_size, config.seed)
    batches = plan.iter_batches()
    rng = RngStream(config.seed, key=(37,))
    state = AdamState(learning_rate=config.learning_rate)

    logger.info(f"GROOVE 학습 시작 (kernel={model.hyper.kernel}, ablation={config.ablation}, "
                f"반복 {config.iterations}, B_eff={plan.b_eff})")

    history: List[LossRecord] = []
    writer = None
    handle = open(history_path, 'w', newline='', encoding='utf-8') if history_path else None
    try:
        if handle:
            writer = csv.writer(handle, delimiter='\t')
            writer.writerow(['iteration', 'groupclip', 'reconstruction', 'step1', 'backtranslation'])

        for iteration in range(config.iterations):
            idx1, idx2 = next(batches)
            record = train_step(model, state, dataset.X[idx1], dataset.Y[idx2],
                                dataset.labels_x[idx1], dataset.labels_y[idx2], config, rng, iteration)
            history.append(record)
            if writer:
                writer.writerow([f"{v:.8g}" if isinstance(v, float) else v for v in asdict(record).values()])

            if (iteration + 1) % config.log_every == 0:
                logger.info(f"반복 {iteration + 1}/{config.iterations}: step1={record.step1:.4f} "
                            f"recon={record.reconstruction:.4f} bt={record.backtranslation:.4f}")
            else:
                logger.debug(f"반복 {iteration + 1}: {record}")
    except DivergenceError:
        logger.error(f"GROOVE 학습 발산 (seed={config.seed})", exc_info=True)
        raise
    finally:
        if handle:
            handle.close()

    logger.info("GROOVE 학습 완료")
    return model, history
