"""전송 계획(transport plan)과 aligner 설정"""
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from groovebench.config import ALIGN_CONFIG

ALIGNER_KINDS = ('eot', 'egwot', 'labeled_eot', 'labeled_egwot', 'labeled_coot')


class AlignSpec(BaseModel):
    """
    aligner 설정

    epsilon은 cost 행렬을 평균으로 나눈 뒤에 적용되는 상대값이다.
    """
    kind: Literal['eot', 'egwot', 'labeled_eot', 'labeled_egwot', 'labeled_coot'] = 'eot'
    epsilon: float = Field(ALIGN_CONFIG['epsilon'], gt=0)
    max_iter: int = Field(ALIGN_CONFIG['max_iter'], ge=1)
    tol: float = Field(ALIGN_CONFIG['tol'], gt=0)
    outer_max_iter: int = Field(ALIGN_CONFIG['outer_max_iter'], ge=1)
    outer_tol: float = Field(ALIGN_CONFIG['outer_tol'], gt=0)
    inner_tol: float = Field(ALIGN_CONFIG['inner_tol'], gt=0)

    @property
    def base_kind(self) -> str:
        """labeled_* 의 블록 단위 aligner"""
        return self.kind.replace('labeled_', '')

    @property
    def is_labeled(self) -> bool:
        return self.kind.startswith('labeled_')


@dataclass
class TransportPlan:
    coupling: np.ndarray
    source_marginal: np.ndarray
    target_marginal: np.ndarray
    kind: str
    epsilon: float
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0
    residual_history: List[float] = field(default_factory=list)
    objective: Optional[float] = None
    feature_plan: Optional['TransportPlan'] = None

    @property
    def shape(self):
        return self.coupling.shape

    def marginal_violation(self) -> float:
        rows = np.abs(self.coupling.sum(axis=1) - self.source_marginal).max()
        cols = np.abs(self.coupling.sum(axis=0) - self.target_marginal).max()
        return float(max(rows, cols))

    def row_normalized(self) -> np.ndarray:
        sums = self.coupling.sum(axis=1, keepdims=True)
        return np.divide(self.coupling, sums, out=np.zeros_like(self.coupling), where=sums > 0)

    def manifest(self) -> dict:
        """CLI manifest용 요약"""
        info = {
            'kind': self.kind,
            'epsilon': self.epsilon,
            'shape': list(self.coupling.shape),
            'iterations': self.iterations,
            'converged': self.converged,
            'residual': self.residual,
            'marginal_violation': self.marginal_violation(),
        }
        if self.objective is not None:
            info['objective'] = self.objective
        if self.feature_plan is not None:
            info['feature_shape'] = list(self.feature_plan.coupling.shape)
        return info
