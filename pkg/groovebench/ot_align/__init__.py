"""OT aligner 모음과 kind 이름 기반 디스패치"""
from typing import Optional

from groovebench.exceptions import ParameterError
from groovebench.ot_align.plan import ALIGNER_KINDS, AlignSpec, TransportPlan
from groovebench.ot_align.sinkhorn import sinkhorn_eot, solve_cost
from groovebench.ot_align.gromov import entropic_gw
from groovebench.ot_align.coot import coot
from groovebench.ot_align.labeled import labeled


def align(Za, Zb, spec: AlignSpec, labels_a=None, labels_b=None) -> TransportPlan:
    """spec.kind에 맞는 aligner로 plan 계산 (labeled_* 는 라벨 필수)"""
    if spec.is_labeled:
        if labels_a is None or labels_b is None:
            raise ParameterError(f"{spec.kind}에는 양쪽 라벨이 필요합니다")
        return labeled(spec.base_kind, labels_a, labels_b, (Za, Zb), spec)
    if spec.kind == 'eot':
        return sinkhorn_eot(Za, Zb, spec)
    return entropic_gw(Za, Zb, spec)
