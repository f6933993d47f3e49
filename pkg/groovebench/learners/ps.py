import logging
from typing import Optional

import numpy as np

from groovebench.baseLearner import BaseLearner
from groovebench.groove.ps_baseline import PSBaseline, PSConfig, train_ps_baseline
from groovebench.utils.dataset_io import Dataset

logger = logging.getLogger(__name__)


class PSLearner(BaseLearner):
    """propensity score 베이스라인 - 분류기 logit을 표현으로 사용"""
    NAME = "ps"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.baseline: Optional[PSBaseline] = None

    def fit(self, dataset: Dataset, seed: int = 0) -> 'PSLearner':
        config = PSConfig(**{**self.ps_options, 'seed': seed})
        logger.info(f"{self.NAME} 학습 시작 (seed={seed})")
        self.baseline = train_ps_baseline(dataset, config)
        logger.info(f"{self.NAME} 학습 정확도: modality 1 {self.baseline.accuracy(dataset.X, dataset.labels_x, 1):.3f}, "
                    f"modality 2 {self.baseline.accuracy(dataset.Y, dataset.labels_y, 2):.3f}")
        return self

    def embed(self, X: np.ndarray, modality: int) -> np.ndarray:
        if self.baseline is None:
            raise RuntimeError(f"{self.NAME}: fit() 전에 embed()를 호출했습니다")
        return self.baseline.embed(X, modality)

    def dataset_groupclip(self, dataset: Dataset) -> float:
        return float('nan')
