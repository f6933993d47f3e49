"""
엔트로피 Gromov-Wasserstein

공간 내부 거리 구조만 비교하므로 두 임베딩의 폭이 달라도 된다.
균등 outer product에서 시작하는 projected gradient (반복마다 선형화 cost를 Sinkhorn으로 풂).
"""
import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from groovebench.exceptions import DegenerateGeometryError, InputError
from groovebench.numerics.matrix import as_matrix
from groovebench.ot_align.plan import AlignSpec, TransportPlan
from groovebench.ot_align.sinkhorn import solve_cost, uniform

logger = logging.getLogger(__name__)


def intra_distance(Z: np.ndarray, name: str) -> np.ndarray:
    """평균으로 정규화한 공간 내부 squared-Euclidean 거리"""
    if np.isnan(Z).any():
        raise InputError(f"{name}에 NaN이 있습니다")
    C = cdist(Z, Z, metric='sqeuclidean')
    scale = C.mean()
    if scale <= 0:
        raise DegenerateGeometryError(f"{name}의 모든 점이 같아 거리 구조가 없습니다")
    return C / scale


def gw_tensor(C1: np.ndarray, C2: np.ndarray, T: np.ndarray) -> np.ndarray:
    """L[i, j] = sum_kl (C1[i,k] - C2[j,l])^2 T[k,l]"""
    a = T.sum(axis=1)
    b = T.sum(axis=0)
    const = (C1 ** 2) @ a[:, None] + ((C2 ** 2) @ b)[None, :]
    return const - 2.0 * C1 @ T @ C2.T


def gw_objective(C1: np.ndarray, C2: np.ndarray, T: np.ndarray) -> float:
    return float(np.sum(gw_tensor(C1, C2, T) * T))


def entropic_gw(Za, Zb, spec: Optional[AlignSpec] = None) -> TransportPlan:
    """
    Args:
        Za: n1×p1, Zb: n2×p2 (n1, n2 >= 2)
        spec: epsilon, outer_max_iter, outer_tol, inner_tol

    Returns:
        TransportPlan (objective = 최종 plan의 GW 값)
    """
    spec = spec or AlignSpec(kind='egwot')
    Za = as_matrix(Za, "Za")
    Zb = as_matrix(Zb, "Zb")
    if Za.shape[0] < 2 or Zb.shape[0] < 2:
        raise DegenerateGeometryError("GW는 양쪽 모두 샘플이 2개 이상이어야 합니다")
    C1 = intra_distance(Za, "Za")
    C2 = intra_distance(Zb, "Zb")

    a = uniform(Za.shape[0])
    b = uniform(Zb.shape[0])
    T = np.outer(a, b)
    inner = None
    converged = False
    change = np.inf
    history = []

    for outer in range(1, spec.outer_max_iter + 1):
        inner = solve_cost(gw_tensor(C1, C2, T), spec, a, b, kind='egwot', tol=spec.inner_tol)
        change = float(np.abs(inner.coupling - T).max())
        history.append(change)
        T = inner.coupling
        logger.debug(f"GW 반복 {outer}: plan 변화량 {change:.3e}")
        if change < spec.outer_tol:
            converged = True
            break

    if not converged:
        logger.warning(f"GW 미수렴: {spec.outer_max_iter}회 외부 반복 후 변화량 {change:.3e}")

    return TransportPlan(
        T, a, b, 'egwot', spec.epsilon,
        iterations=outer,
        converged=converged and inner.converged,
        residual=inner.residual,
        residual_history=history,
        objective=gw_objective(C1, C2, T),
    )
