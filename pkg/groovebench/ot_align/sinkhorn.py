"""
엔트로피 정규화 OT - log-domain Sinkhorn

cost는 평균으로 나눈 뒤 상대 epsilon으로 푼다.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from groovebench.exceptions import InputError
from groovebench.numerics.matrix import as_matrix, check_width
from groovebench.ot_align.plan import AlignSpec, TransportPlan

logger = logging.getLogger(__name__)


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def normalize_cost(cost: np.ndarray) -> np.ndarray:
    """평균으로 나누기 (전부 0이면 그대로)"""
    if not np.all(np.isfinite(cost)):
        raise InputError("cost 행렬에 NaN/inf가 있습니다")
    scale = cost.mean()
    return cost / scale if scale > 0 else cost


def _sinkhorn_log(cost: np.ndarray, a: np.ndarray, b: np.ndarray, epsilon: float,
                  max_iter: int, tol: float) -> Tuple[np.ndarray, int, bool, float, List[float]]:
    """
    log-domain Sinkhorn 반복

    f, g 순서로 갱신하므로 열 marginal은 매 반복 정확히 맞고,
    행 marginal의 L1 오차가 residual이다.
    """
    log_a = np.log(a)
    log_b = np.log(b)
    K = -cost / epsilon
    f = np.zeros_like(a)
    g = np.zeros_like(b)
    history: List[float] = []
    residual = np.inf

    for iteration in range(1, max_iter + 1):
        f = log_a - logsumexp(K + g[None, :], axis=1)
        g = log_b - logsumexp(K + f[:, None], axis=0)
        log_plan = K + f[:, None] + g[None, :]
        residual = float(np.abs(np.exp(logsumexp(log_plan, axis=1)) - a).sum())
        history.append(residual)
        if residual < tol:
            return np.exp(log_plan), iteration, True, residual, history

    return np.exp(K + f[:, None] + g[None, :]), max_iter, False, residual, history


def solve_cost(cost: np.ndarray, spec: AlignSpec, a: Optional[np.ndarray] = None,
               b: Optional[np.ndarray] = None, kind: str = 'eot', tol: Optional[float] = None) -> TransportPlan:
    """
    주어진 cost 행렬로 entropic OT

    Args:
        cost: n1×n2 cost (정규화 전)
        spec: epsilon, max_iter, tol
        a, b: marginal (None이면 균등)
        kind: plan 메타데이터에 남길 aligner 이름
        tol: spec.tol 대신 쓸 수렴 기준 (GW/COOT 내부 반복용)
    """
    cost = np.asarray(cost, dtype=np.float64)
    n1, n2 = cost.shape
    a = uniform(n1) if a is None else np.asarray(a, dtype=np.float64)
    b = uniform(n2) if b is None else np.asarray(b, dtype=np.float64)
    cost = normalize_cost(cost)

    if n1 == 1 or n2 == 1:
        # 가능한 coupling이 outer product 하나뿐
        return TransportPlan(np.outer(a, b), a, b, kind, spec.epsilon, iterations=0)

    coupling, iterations, converged, residual, history = _sinkhorn_log(
        cost, a, b, spec.epsilon, spec.max_iter, spec.tol if tol is None else tol)
    if not converged:
        logger.warning(f"Sinkhorn 미수렴: {iterations}회 반복 후 residual={residual:.3e}")
    return TransportPlan(coupling, a, b, kind, spec.epsilon, iterations, converged, residual, history)


def sinkhorn_eot(Za, Zb, spec: Optional[AlignSpec] = None) -> TransportPlan:
    """
    공유 임베딩 공간에서 squared-Euclidean cost로 EOT

    Raises:
        ShapeError: 임베딩 폭이 다름
        InputError: 입력에 NaN
    """
    spec = spec or AlignSpec(kind='eot')
    Za = as_matrix(Za, "Za")
    Zb = as_matrix(Zb, "Zb")
    check_width(Zb, Za.shape[1], "Zb")
    if np.isnan(Za).any() or np.isnan(Zb).any():
        raise InputError("임베딩에 NaN이 있습니다")
    cost = cdist(Za, Zb, metric='sqeuclidean')
    return solve_cost(cost, spec, kind='eot')
