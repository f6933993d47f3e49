"""데이터셋 파일 입출력

디렉터리 형식:
    X.grvm, Y.grvm          관측 행렬 (모달리티 1, 2)
    labels_x.txt, labels_y.txt   줄당 정수 라벨 1개
    truth.grvm (선택)       X의 i번째 행과 짝인 Y 행 인덱스 (1열 행렬)
"""
import os
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from groovebench.exceptions import FormatError, ShapeError
from groovebench.numerics.matrix import Matrix, read_grvm, write_grvm

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    """두 모달리티 관측값 + 샘플별 라벨 (+ 알려진 경우 진짜 짝)"""
    X: Matrix
    Y: Matrix
    labels_x: np.ndarray
    labels_y: np.ndarray
    pairing: Optional[np.ndarray] = None

    def __post_init__(self):
        self.labels_x = np.asarray(self.labels_x, dtype=np.int64)
        self.labels_y = np.asarray(self.labels_y, dtype=np.int64)
        if self.X.shape[0] != self.labels_x.size:
            raise ShapeError(f"X 행 수 {self.X.shape[0]} != 라벨 수 {self.labels_x.size}")
        if self.Y.shape[0] != self.labels_y.size:
            raise ShapeError(f"Y 행 수 {self.Y.shape[0]} != 라벨 수 {self.labels_y.size}")
        if self.pairing is not None:
            self.pairing = np.asarray(self.pairing, dtype=np.int64)
            if self.pairing.size != self.X.shape[0]:
                raise ShapeError("pairing 길이가 X 행 수와 다릅니다")


def read_labels(path) -> np.ndarray:
    labels = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise FormatError(f"{path}:{line_no}: 정수 라벨이 아닙니다: {line!r}")
    return np.asarray(labels, dtype=np.int64)


def write_labels(path, labels) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        for label in np.asarray(labels).ravel():
            f.write(f"{int(label)}\n")


def load_dataset(directory) -> Dataset:
    """
    데이터셋 디렉터리 로드

    truth.grvm이 없고 두 모달리티 샘플 수가 같으면 항등 pairing으로 간주한다.
    """
    X = read_grvm(os.path.join(directory, 'X.grvm'))
    Y = read_grvm(os.path.join(directory, 'Y.grvm'))
    labels_x = read_labels(os.path.join(directory, 'labels_x.txt'))
    labels_y = read_labels(os.path.join(directory, 'labels_y.txt'))

    truth_path = os.path.join(directory, 'truth.grvm')
    if os.path.exists(truth_path):
        pairing = read_grvm(truth_path)[:, 0].round().astype(np.int64)
    elif X.shape[0] == Y.shape[0]:
        logger.info(f"{directory}: truth.grvm 없음 - 항등 pairing 사용")
        pairing = np.arange(X.shape[0])
    else:
        logger.warning(f"{directory}: truth.grvm 없음, 샘플 수도 달라 pairing을 알 수 없습니다")
        pairing = None

    logger.info(f"데이터셋 로드: X {X.shape}, Y {Y.shape}")
    return Dataset(X, Y, labels_x, labels_y, pairing)


def save_dataset(dataset: Dataset, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    write_grvm(os.path.join(directory, 'X.grvm'), dataset.X)
    write_grvm(os.path.join(directory, 'Y.grvm'), dataset.Y)
    write_labels(os.path.join(directory, 'labels_x.txt'), dataset.labels_x)
    write_labels(os.path.join(directory, 'labels_y.txt'), dataset.labels_y)
    if dataset.pairing is not None:
        write_grvm(os.path.join(directory, 'truth.grvm'), dataset.pairing.reshape(-1, 1))
