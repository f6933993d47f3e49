"""라벨 균형 미니배치 샘플러"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple

import numpy as np

from groovebench.exceptions import InfeasibleBatchError, MissingPositivesError
from groovebench.numerics.rng import RngStream

logger = logging.getLogger(__name__)


@dataclass
class BalancedBatchPlan:
    """
    B_eff = B - (B mod L), 라벨당 B_eff / L 개씩

    한 epoch 안에서 각 라벨은 n_min 개를 넘게 뽑히지 않고 중복도 없다.
    """
    batch_size: int
    b_eff: int
    quota: int
    n_min: int
    label_values: np.ndarray
    index_by_label: Tuple[Dict[int, np.ndarray], Dict[int, np.ndarray]]
    seed: int

    @property
    def batches_per_epoch(self) -> int:
        return self.n_min // self.quota

    def epoch(self, rng: RngStream) -> List[Tuple[np.ndarray, np.ndarray]]:
        """epoch 하나 분량의 (modality 1 인덱스, modality 2 인덱스) 배치 목록"""
        per_modality = []
        for lookup in self.index_by_label:
            chosen = {label: rng.generator.permutation(lookup[label])[:self.n_min]
                      for label in self.label_values}
            per_modality.append(chosen)

        batches = []
        for b in range(self.batches_per_epoch):
            window = slice(b * self.quota, (b + 1) * self.quota)
            idx1 = np.concatenate([per_modality[0][label][window] for label in self.label_values])
            idx2 = np.concatenate([per_modality[1][label][window] for label in self.label_values])
            batches.append((idx1, idx2))
        return batches

    def iter_batches(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """epoch을 계속 새로 섞어가며 끝없이 배치를 낸다"""
        rng = RngStream(self.seed, key=(31,))
        while True:
            for batch in self.epoch(rng):
                yield batch


def plan_balanced_batches(labels1, labels2, batch_size: int, seed: int = 0) -> BalancedBatchPlan:
    """
    두 모달리티 라벨로 균형 배치 계획 생성

    Raises:
        MissingPositivesError: 한쪽 모달리티에만 있는 라벨
        InfeasibleBatchError: B_eff / L > n_min
    """
    labels1 = np.asarray(labels1)
    labels2 = np.asarray(labels2)
    values = np.unique(labels1)
    for label in np.union1d(values, np.unique(labels2)):
        if not (np.any(labels1 == label) and np.any(labels2 == label)):
            raise MissingPositivesError(int(label))

    n_labels = values.size
    b_eff = batch_size - (batch_size % n_labels)
    quota = b_eff // n_labels

    lookup1 = {int(label): np.flatnonzero(labels1 == label) for label in values}
    lookup2 = {int(label): np.flatnonzero(labels2 == label) for label in values}
    n_min = min(min(v.size for v in lookup1.values()), min(v.size for v in lookup2.values()))

    if quota == 0:
        raise InfeasibleBatchError(f"배치 크기 {batch_size}가 라벨 수 {n_labels}보다 작습니다")
    if quota > n_min:
        raise InfeasibleBatchError(
            f"라벨당 할당량 {quota} > 최소 라벨 샘플 수 {n_min}: 배치 크기를 {n_min * n_labels} 이하로 줄이세요")

    logger.debug(f"균형 배치: B={batch_size}, B_eff={b_eff}, 라벨당 {quota}, n_min={n_min}")
    return BalancedBatchPlan(batch_size, b_eff, quota, n_min, values.astype(np.int64),
                             (lookup1, lookup2), seed)
