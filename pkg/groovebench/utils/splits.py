"""
train/test 분할 - 라벨 층화 80-20 holdout, k-fold, leave-one-perturbation-out

짝 정보(pairing)가 있으면 modality 2 인덱스는 pairing[modality 1 인덱스]로 따라가서
테스트 세트의 i번째 행끼리가 참 짝이 된다. 없으면 modality 2도 자기 라벨로 따로 층화한다.
"""
import logging
from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np

from groovebench.exceptions import InfeasibleSplitError, ParameterError
from groovebench.numerics.rng import RngStream

logger = logging.getLogger(__name__)

SPLIT_MODES = ('holdout_80_20', 'kfold', 'lopo')
HOLDOUT_TEST_FRACTION = 0.2


@dataclass
class SplitFold:
    train_x: np.ndarray
    test_x: np.ndarray
    train_y: np.ndarray
    test_y: np.ndarray
    held_out_label: Optional[int] = None


@dataclass
class SplitPlan:
    mode: str
    folds: List[SplitFold]
    seed: int
    k: Optional[int] = None

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


def _kfold_assignment(labels: np.ndarray, k: int, rng: RngStream) -> np.ndarray:
    """라벨별로 섞은 뒤 라벨을 넘어 이어지는 round-robin으로 fold 배정"""
    assignment = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        if members.size < k:
            raise InfeasibleSplitError(int(label), f"샘플 {members.size}개로는 {k}-fold 층화가 불가능합니다")
        members = rng.generator.permutation(members)
        assignment[members] = (offset + np.arange(members.size)) % k
        offset += members.size
    return assignment


def _holdout_test(labels: np.ndarray, rng: RngStream) -> np.ndarray:
    test = []
    for label in np.unique(labels):
        members = rng.generator.permutation(np.flatnonzero(labels == label))
        n_test = int(round(HOLDOUT_TEST_FRACTION * members.size))
        if n_test == 0 or n_test == members.size:
            raise InfeasibleSplitError(int(label), f"샘플 {members.size}개로는 80-20 분할이 불가능합니다")
        test.append(members[:n_test])
    return np.sort(np.concatenate(test))


def _partition(labels: np.ndarray, mode: str, k: int, rng: RngStream):
    """[(train, test, held_out)] - 한 모달리티 기준"""
    n = labels.size
    everything = np.arange(n)
    if mode == 'holdout_80_20':
        test = _holdout_test(labels, rng)
        return [(np.setdiff1d(everything, test), test, None)]
    if mode == 'kfold':
        assignment = _kfold_assignment(labels, k, rng)
        return [(np.flatnonzero(assignment != f), np.flatnonzero(assignment == f), None) for f in range(k)]
    values = np.unique(labels)
    if values.size < 2:
        raise InfeasibleSplitError(int(values[0]) if values.size else -1, "LOPO에는 라벨이 2개 이상 필요합니다")
    return [(np.flatnonzero(labels != v), np.flatnonzero(labels == v), int(v)) for v in values]


def make_splits(labels, mode: Literal['holdout_80_20', 'kfold', 'lopo'] = 'holdout_80_20', seed: int = 0,
                k: int = 5, labels_y=None, pairing=None) -> SplitPlan:
    """
    Args:
        labels: modality 1 라벨
        mode: 분할 방식
        seed: 같은 seed면 같은 분할
        k: kfold의 fold 수
        labels_y: modality 2 라벨 (pairing이 없을 때 따로 층화)
        pairing: modality 1 행 i의 참 짝인 modality 2 행 번호

    Raises:
        InfeasibleSplitError: 층화가 불가능한 라벨
    """
    if mode not in SPLIT_MODES:
        raise ParameterError(f"알 수 없는 분할 방식: {mode}")
    if mode == 'kfold' and k < 2:
        raise ParameterError(f"k-fold의 k는 2 이상이어야 합니다: {k}")
    labels = np.asarray(labels)
    rng = RngStream(seed, key=(53,))
    parts_x = _partition(labels, mode, k, rng.child(1))

    if pairing is not None:
        pairing = np.asarray(pairing)
        folds = [SplitFold(train, test, pairing[train], pairing[test], held)
                 for train, test, held in parts_x]
    else:
        if labels_y is None:
            raise ParameterError("pairing이 없으면 modality 2 라벨이 필요합니다")
        labels_y = np.asarray(labels_y)
        if mode == 'lopo':
            folds = [SplitFold(train, test, np.flatnonzero(labels_y != held), np.flatnonzero(labels_y == held), held)
                     for train, test, held in parts_x]
        else:
            parts_y = _partition(labels_y, mode, k, rng.child(2))
            folds = [SplitFold(tx, sx, ty, sy) for (tx, sx, _), (ty, sy, _) in zip(parts_x, parts_y)]

    logger.debug(f"분할 생성: {mode}, fold {len(folds)}개, seed={seed}")
    return SplitPlan(mode, folds, seed, k if mode == 'kfold' else None)
