"""
매칭 / imputation 평가 지표

매칭: trace, 대칭 barycentric FOSCTTM
imputation: MSE, WD, cosine, KNN recall / PR / ROC
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import wasserstein_distance
from sklearn.metrics import average_precision_score, roc_auc_score
from sklearn.metrics.pairwise import cosine_similarity

from groovebench.exceptions import ContractError, KnnInfeasibleError, ShapeError
from groovebench.numerics.matrix import as_matrix
from groovebench.ot_align.plan import TransportPlan

logger = logging.getLogger(__name__)

MATCHING_METRICS = ('trace', 'bary_foscttm')
IMPUTATION_METRICS = ('mse', 'wd', 'cos_sim', 'knn_recall', 'knn_pr', 'knn_roc')
METRIC_NAMES = MATCHING_METRICS + IMPUTATION_METRICS


def _coupling(plan) -> np.ndarray:
    return plan.coupling if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=np.float64)


def _row_normalize(T: np.ndarray) -> np.ndarray:
    sums = T.sum(axis=1, keepdims=True)
    return np.divide(T, sums, out=np.zeros_like(T), where=sums > 0)


def trace_metric(plan) -> float:
    """행 정규화 후 (1/n) sum T_ii - 참 짝이 대각선에 있어야 한다"""
    T = _coupling(plan)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ContractError(f"trace는 정방 plan에서만 정의됩니다: {T.shape}")
    return float(np.trace(_row_normalize(T)) / T.shape[0])


def _foscttm_direction(T: np.ndarray, X: np.ndarray) -> float:
    """X̂ = rownorm(T) X 에서 참 짝보다 가까운 샘플 비율"""
    projected = _row_normalize(T) @ X
    n = X.shape[0]
    dist = cdist(projected, X)
    true_dist = np.diag(dist)
    closer = (dist < true_dist[:, None]).sum(axis=1)
    return float(np.mean(closer / (n - 1)))


def bary_foscttm(plan, X1, X2) -> float:
    """
    대칭 barycentric FOSCTTM

    plan은 n1×n2 (행: modality 1, 열: modality 2), i번째 행/열이 참 짝.
        방향 1: rownorm(T^T) X1 - modality 2 샘플을 X1 공간으로
        방향 2: rownorm(T) X2   - modality 1 샘플을 X2 공간으로
    두 방향의 평균을 반환한다.
    """
    T = _coupling(plan)
    X1 = as_matrix(X1, "X1")
    X2 = as_matrix(X2, "X2")
    if T.shape != (X1.shape[0], X2.shape[0]):
        raise ShapeError(f"plan {T.shape}과 데이터 행 수 ({X1.shape[0]}, {X2.shape[0]})가 맞지 않습니다")
    if T.shape[0] != T.shape[1]:
        raise ContractError(f"FOSCTTM은 참 짝이 있는 정방 plan이 필요합니다: {T.shape}")
    if T.shape[0] < 2:
        raise ContractError("FOSCTTM은 샘플이 2개 이상이어야 합니다")
    return 0.5 * (_foscttm_direction(T.T, X1) + _foscttm_direction(T, X2))


def _top_k(similarity: np.ndarray, k: int) -> np.ndarray:
    """자기 자신 제외, 동률은 낮은 인덱스 우선"""
    sim = similarity.copy()
    np.fill_diagonal(sim, -np.inf)
    return np.argsort(-sim, axis=1, kind='stable')[:, :k]


def knn_scores(X_true: np.ndarray, X_hat: np.ndarray, k: int = 10) -> Tuple[float, float, float]:
    """
    cosine KNN 그래프 비교

    정답: 실제 공간의 k-NN 소속 여부, 점수: 예측 공간의 cosine 유사도.
    """
    n = X_true.shape[0]
    if n <= k + 1:
        raise KnnInfeasibleError(f"KNN 평가에는 k+1={k + 1}개보다 많은 샘플이 필요합니다 (현재 {n}개)")

    sim_true = cosine_similarity(X_true)
    sim_hat = cosine_similarity(X_hat)
    true_nn = _top_k(sim_true, k)
    hat_nn = _top_k(sim_hat, k)

    recalls, precisions, rocs = [], [], []
    candidates = np.ones(n, dtype=bool)
    for i in range(n):
        recalls.append(np.intersect1d(true_nn[i], hat_nn[i]).size / k)
        membership = np.zeros(n, dtype=bool)
        membership[true_nn[i]] = True
        candidates[:] = True
        candidates[i] = False
        precisions.append(average_precision_score(membership[candidates], sim_hat[i, candidates]))
        rocs.append(roc_auc_score(membership[candidates], sim_hat[i, candidates]))
    return float(np.mean(recalls)), float(np.mean(precisions)), float(np.mean(rocs))


def feature_cosine(X_true: np.ndarray, X_hat: np.ndarray) -> float:
    """대응 피처 열 사이 cosine의 평균 (영벡터 열은 0점)"""
    norms = np.linalg.norm(X_true, axis=0) * np.linalg.norm(X_hat, axis=0)
    zero = norms == 0
    if zero.any():
        logger.warning(f"norm이 0인 피처 열 {int(zero.sum())}개는 cosine 0으로 처리")
    dots = np.sum(X_true * X_hat, axis=0)
    scores = np.divide(dots, norms, out=np.zeros_like(dots), where=~zero)
    return float(np.mean(scores))


def imputation_metrics(X_true, X_hat, k: int = 10) -> Dict[str, float]:
    """
    Returns:
        {'mse', 'wd', 'cos_sim', 'knn_recall', 'knn_pr', 'knn_roc'}
    """
    X_true = as_matrix(X_true, "X_true")
    X_hat = as_matrix(X_hat, "X_hat")
    if X_true.shape != X_hat.shape:
        raise ShapeError(f"X_true {X_true.shape}와 X_hat {X_hat.shape}의 크기가 다릅니다")

    recall, pr, roc = knn_scores(X_true, X_hat, k)
    return {
        'mse': float(np.mean((X_true - X_hat) ** 2)),
        'wd': float(np.mean([wasserstein_distance(X_true[:, c], X_hat[:, c]) for c in range(X_true.shape[1])])),
        'cos_sim': feature_cosine(X_true, X_hat),
        'knn_recall': recall,
        'knn_pr': pr,
        'knn_roc': roc,
    }


def standard_error(values: Iterable[float]) -> float:
    values = np.asarray(list(values), dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


@dataclass
class MetricReport:
    """지표별 fold(또는 replicate) 값 모음"""
    values: Dict[str, List[float]] = field(default_factory=dict)

    def add(self, metrics: Dict[str, float]) -> None:
        for name, value in metrics.items():
            self.values.setdefault(name, []).append(float(value))

    def mean(self, name: str) -> float:
        return float(np.mean(self.values[name]))

    def se(self, name: str) -> float:
        return standard_error(self.values[name])

    def summary(self) -> Dict[str, Tuple[float, float]]:
        return {name: (self.mean(name), self.se(name)) for name in METRIC_NAMES if name in self.values}

    def rows(self, method: str) -> List[Tuple[str, str, int, float]]:
        """(method, metric, fold, value) 행 목록"""
        return [(method, name, fold, value)
                for name in METRIC_NAMES if name in self.values
                for fold, value in enumerate(self.values[name])]
