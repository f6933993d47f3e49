"""
Co-optimal transport

샘플 coupling과 피처 coupling을 번갈아 푼다.
    피처 coupling 고정 → 샘플 coupling (entropic)
    샘플 coupling 고정 → 피처 coupling (entropic)
"""
import logging
from typing import Optional, Tuple

import numpy as np

from groovebench.exceptions import InputError, ShapeError
from groovebench.numerics.matrix import as_matrix
from groovebench.ot_align.plan import AlignSpec, TransportPlan
from groovebench.ot_align.sinkhorn import solve_cost, uniform

logger = logging.getLogger(__name__)


def _linearized_cost(A: np.ndarray, B: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """
    L[i, j] = sum_kl (A[i,k] - B[j,l])^2 coupling[k,l]

    샘플 cost면 A, B는 데이터 행렬, 피처 cost면 전치 행렬.
    """
    wa = coupling.sum(axis=1)
    wb = coupling.sum(axis=0)
    return (A ** 2) @ wa[:, None] + ((B ** 2) @ wb)[None, :] - 2.0 * A @ coupling @ B.T


def coot_objective(Xa: np.ndarray, Xb: np.ndarray, Ts: np.ndarray, Tv: np.ndarray) -> float:
    return float(np.sum(_linearized_cost(Xa, Xb, Tv) * Ts))


def coot(Xa, Xb, spec: Optional[AlignSpec] = None) -> Tuple[TransportPlan, TransportPlan]:
    """
    Args:
        Xa: n1×p1, Xb: n2×p2 (n, p 모두 2 이상)

    Returns:
        (샘플 plan n1×n2, 피처 plan p1×p2) - 샘플 plan의 feature_plan에도 피처 plan을 붙인다
    """
    spec = spec or AlignSpec(kind='labeled_coot')
    Xa = as_matrix(Xa, "Xa")
    Xb = as_matrix(Xb, "Xb")
    if min(Xa.shape) < 2 or min(Xb.shape) < 2:
        raise ShapeError(f"COOT 입력은 샘플/피처 모두 2개 이상이어야 합니다: {Xa.shape}, {Xb.shape}")
    if np.isnan(Xa).any() or np.isnan(Xb).any():
        raise InputError("COOT 입력에 NaN이 있습니다")

    ws_a, ws_b = uniform(Xa.shape[0]), uniform(Xb.shape[0])
    wv_a, wv_b = uniform(Xa.shape[1]), uniform(Xb.shape[1])
    Ts = np.outer(ws_a, ws_b)
    Tv = np.outer(wv_a, wv_b)
    sample_plan = feature_plan = None
    converged = False
    change = np.inf
    history = []

    for outer in range(1, spec.outer_max_iter + 1):
        feature_plan = solve_cost(_linearized_cost(Xa.T, Xb.T, Ts), spec, wv_a, wv_b,
                                  kind='coot_feature', tol=spec.inner_tol)
        Tv = feature_plan.coupling
        sample_plan = solve_cost(_linearized_cost(Xa, Xb, Tv), spec, ws_a, ws_b,
                                 kind='coot', tol=spec.inner_tol)
        change = float(np.abs(sample_plan.coupling - Ts).max())
        history.append(change)
        Ts = sample_plan.coupling
        logger.debug(f"COOT 반복 {outer}: 샘플 plan 변화량 {change:.3e}")
        if change < spec.outer_tol:
            converged = True
            break

    if not converged:
        logger.warning(f"COOT 미수렴: {spec.outer_max_iter}회 교대 반복 후 변화량 {change:.3e}")

    objective = coot_objective(Xa, Xb, Ts, Tv)
    feature = TransportPlan(Tv, wv_a, wv_b, 'coot_feature', spec.epsilon, outer,
                            converged and feature_plan.converged, feature_plan.residual,
                            objective=objective)
    sample = TransportPlan(Ts, ws_a, ws_b, 'coot', spec.epsilon, outer,
                           converged and sample_plan.converged, sample_plan.residual,
                           residual_history=history, objective=objective, feature_plan=feature)
    return sample, feature
