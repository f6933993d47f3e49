"""
표현 학습기(learner) 기본 클래스
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from groovebench.groove.losses import groupclip_loss
from groovebench.groove.model import GrooveHyper, GrooveModel, encode, init_model
from groovebench.groove.trainer import LossRecord, TrainConfig, train
from groovebench.utils.dataset_io import Dataset

logger = logging.getLogger(__name__)


class BaseLearner:
    """모든 learner의 기본 클래스 - 기본 구현은 GROOVE 학습"""

    NAME = ""
    KERNEL = 'cosine'
    ABLATION = 'full'

    def __init__(self, groove: Optional[Dict] = None, train: Optional[Dict] = None,
                 ps: Optional[Dict] = None):
        self.groove_options = dict(groove or {})
        self.train_options = dict(train or {})
        self.ps_options = dict(ps or {})
        self.model: Optional[GrooveModel] = None
        self.history: List[LossRecord] = []

    def hyper(self) -> GrooveHyper:
        return GrooveHyper(**{**self.groove_options, 'kernel': self.KERNEL})

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(**{**self.train_options, 'seed': seed, 'ablation': self.ABLATION})

    def fit(self, dataset: Dataset, seed: int = 0) -> 'BaseLearner':
        """
        학습 데이터로 learner 학습

        Args:
            dataset: 학습 split
            seed: 셀 단위 seed (초기화/배치/노이즈 모두 여기서 파생)
        """
        hyper = self.hyper()
        model = init_model(dataset.X.shape[1], dataset.Y.shape[1], hyper, seed)
        logger.info(f"{self.NAME} 학습 시작 (seed={seed}, 샘플 {dataset.X.shape[0]}/{dataset.Y.shape[0]})")
        self.model, self.history = train(model, dataset, self.train_config(seed))
        return self

    def embed(self, X: np.ndarray, modality: int) -> np.ndarray:
        """eval 모드 공유 잠재공간 임베딩"""
        if self.model is None:
            raise RuntimeError(f"{self.NAME}: fit() 전에 embed()를 호출했습니다")
        return encode(self.model, X, modality, 'eval')

    def embed_pair(self, X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.embed(X, 1), self.embed(Y, 2)

    def dataset_groupclip(self, dataset: Dataset) -> float:
        """데이터셋 전체 임베딩에 대한 GroupCLIP 값 (eval 모드)"""
        hyper = self.model.hyper
        Z1, Z2 = self.embed_pair(dataset.X, dataset.Y)
        return groupclip_loss(Z1, Z2, dataset.labels_x, dataset.labels_y, hyper.kernel, hyper.tau, hyper.eta)
