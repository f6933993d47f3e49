"""
라벨 제약 aligner - 라벨별 블록을 따로 풀어 block-diagonal plan으로 조립

블록 질량 w_l ∝ min(n_al / n_a, n_bl / n_b).
한쪽에만 있는 라벨의 샘플은 반대편 전체에 균등하게 연결한 뒤 전체를 재정규화한다.
"""
import logging
from typing import Callable, Dict, Optional

import numpy as np

from groovebench.exceptions import InputError, ParameterError
from groovebench.numerics.matrix import as_matrix
from groovebench.ot_align.coot import coot
from groovebench.ot_align.gromov import entropic_gw
from groovebench.ot_align.plan import AlignSpec, TransportPlan
from groovebench.ot_align.sinkhorn import sinkhorn_eot, uniform

logger = logging.getLogger(__name__)

BASE_ALIGNERS: Dict[str, Callable] = {
    'eot': sinkhorn_eot,
    'egwot': entropic_gw,
    'coot': lambda Za, Zb, spec: coot(Za, Zb, spec)[0],
}


def _solve_block(aligner: str, Za: np.ndarray, Zb: np.ndarray, spec: AlignSpec) -> TransportPlan:
    if Za.shape[0] == 1 or Zb.shape[0] == 1:
        a, b = uniform(Za.shape[0]), uniform(Zb.shape[0])
        return TransportPlan(np.outer(a, b), a, b, aligner, spec.epsilon)
    return BASE_ALIGNERS[aligner](Za, Zb, spec)


def labeled(aligner: str, labels_a, labels_b, inputs, spec: Optional[AlignSpec] = None) -> TransportPlan:
    """
    Args:
        aligner: 블록 aligner ('eot' | 'egwot' | 'coot')
        labels_a, labels_b: 양쪽 샘플 라벨
        inputs: (Za, Zb) 임베딩 또는 원본 행렬
        spec: 블록 solver 설정

    Returns:
        n_a×n_b TransportPlan (다른 라벨 사이 coupling은 정확히 0)

    Raises:
        InputError: 공유 라벨 없음
    """
    if aligner not in BASE_ALIGNERS:
        raise ParameterError(f"알 수 없는 블록 aligner: {aligner}")
    spec = spec or AlignSpec(kind=f"labeled_{aligner}")
    Za, Zb = (as_matrix(z, name) for z, name in zip(inputs, ("Za", "Zb")))
    labels_a = np.asarray(labels_a)
    labels_b = np.asarray(labels_b)
    if labels_a.size != Za.shape[0] or labels_b.size != Zb.shape[0]:
        raise InputError("라벨 수와 샘플 수가 다릅니다")

    n_a, n_b = Za.shape[0], Zb.shape[0]
    shared = np.intersect1d(labels_a, labels_b)
    if shared.size == 0:
        raise InputError("두 모달리티에 공통 라벨이 없습니다")

    weights = np.array([min(np.mean(labels_a == label), np.mean(labels_b == label)) for label in shared])
    weights = weights / weights.sum()

    coupling = np.zeros((n_a, n_b))
    # 의도한 marginal: 블록 안에서는 균등
    row_mass, col_mass = np.zeros(n_a), np.zeros(n_b)
    iterations, converged, residual = 0, True, 0.0
    objective = 0.0 if aligner != 'eot' else None
    feature = None

    for label, weight in zip(shared, weights):
        rows = np.flatnonzero(labels_a == label)
        cols = np.flatnonzero(labels_b == label)
        block = _solve_block(aligner, Za[rows], Zb[cols], spec)
        coupling[np.ix_(rows, cols)] = weight * block.coupling
        row_mass[rows] = weight / rows.size
        col_mass[cols] = weight / cols.size
        iterations = max(iterations, block.iterations)
        converged = converged and block.converged
        residual = max(residual, block.residual)
        if objective is not None and block.objective is not None:
            objective += weight * block.objective
        if block.feature_plan is not None:
            part = weight * block.feature_plan.coupling
            feature = part if feature is None else feature + part
        logger.debug(f"라벨 {label} 블록 {rows.size}×{cols.size} 완료 (질량 {weight:.4f})")

    unseen_a = ~np.isin(labels_a, shared)
    unseen_b = ~np.isin(labels_b, shared)
    if unseen_a.any() or unseen_b.any():
        logger.warning(f"반대편에 없는 라벨 샘플: modality a {int(unseen_a.sum())}개, "
                       f"modality b {int(unseen_b.sum())}개 → 균등 연결")
        coupling[unseen_a, :] += 1.0 / (n_a * n_b)
        coupling[:, unseen_b] += 1.0 / (n_a * n_b)
        row_mass += unseen_a / n_a + unseen_b.sum() / (n_a * n_b)
        col_mass += unseen_b / n_b + unseen_a.sum() / (n_a * n_b)
        coupling /= coupling.sum()
        total = row_mass.sum()
        row_mass, col_mass = row_mass / total, col_mass / total

    feature_plan = None
    if feature is not None:
        feature = feature / feature.sum()
        feature_plan = TransportPlan(feature, uniform(feature.shape[0]), uniform(feature.shape[1]),
                                     'coot_feature', spec.epsilon, iterations, converged, residual)

    return TransportPlan(coupling, row_mass, col_mass, f"labeled_{aligner}",
                         spec.epsilon, iterations, converged, residual,
                         objective=objective, feature_plan=feature_plan)
