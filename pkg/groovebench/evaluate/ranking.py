"""지표 방향을 고려한 mean rank"""
import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from groovebench.exceptions import IncompleteTableError

logger = logging.getLogger(__name__)

# True = 클수록 좋음
METRIC_DIRECTIONS = {
    'trace': True,
    'bary_foscttm': False,
    'mse': False,
    'wd': False,
    'cos_sim': True,
    'knn_recall': True,
    'knn_pr': True,
    'knn_roc': True,
}


def metric_ranks(values: Sequence[float], metric: str) -> np.ndarray:
    """1 = 최고, 동률은 평균 순위"""
    values = np.asarray(values, dtype=np.float64)
    return rankdata(-values if METRIC_DIRECTIONS[metric] else values, method='average')


def mean_rank(table: Mapping[str, Mapping[str, float]],
              metrics: Optional[Sequence[str]] = None) -> List[Tuple[str, float]]:
    """
    Args:
        table: {method: {metric: value}}
        metrics: 순위에 쓸 지표 (None이면 첫 method의 지표 전부)

    Returns:
        [(method, mean rank)] 오름차순 (동률은 method 이름순)

    Raises:
        IncompleteTableError: 빈 칸이 있음
    """
    methods = sorted(table)
    if not methods:
        raise IncompleteTableError("순위를 매길 method가 없습니다")
    if metrics is None:
        metrics = [m for m in METRIC_DIRECTIONS if m in table[methods[0]]]

    ranks: Dict[str, List[float]] = {method: [] for method in methods}
    for metric in metrics:
        column = []
        for method in methods:
            value = table[method].get(metric)
            if value is None or not np.isfinite(value):
                raise IncompleteTableError(f"{method}의 {metric} 값이 없습니다")
            column.append(value)
        for method, rank in zip(methods, metric_ranks(column, metric)):
            ranks[method].append(float(rank))

    result = [(method, float(np.mean(ranks[method]))) for method in methods]
    return sorted(result, key=lambda item: (item[1], item[0]))


def top_two(values: Sequence[float], metric: str) -> Tuple[Optional[int], Optional[int]]:
    """최고 / 차선 인덱스 (값이 1개면 차선 없음)"""
    if len(values) == 0:
        return None, None
    order = np.argsort(metric_ranks(values, metric), kind='stable')
    second = int(order[1]) if len(order) > 1 else None
    return int(order[0]), second
