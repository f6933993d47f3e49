"""
GroupCLIP 온도(tau) × 복원 가중치(beta) 민감도 스윕

(tau, beta) 칸마다 groove_cosine 매칭 평가를 돌리고, setting별 평균을 다시
세 shared proportion 설정에 걸쳐 평균낸다. 결과는 등고선 그리기용 CSV.
"""
import csv
import logging
import os
from typing import Dict, List, Optional, Sequence

import numpy as np

from groovebench.bench_manager import BenchGrid, BenchManager, setting_name
from groovebench.evaluate.metrics import MATCHING_METRICS
from groovebench.utils.result_store import ResultStore

logger = logging.getLogger(__name__)

SWEEP_CSV = 'sweep.csv'


def _cell_dir(output_dir: str, tau: float, beta: float) -> str:
    return os.path.join(output_dir, f"tau{tau:g}_beta{beta:g}")


def _average(records: List[Dict], settings: Sequence[str]) -> Dict[str, float]:
    """setting별 평균 → setting 평균"""
    result = {}
    for metric in MATCHING_METRICS:
        per_setting = []
        for setting in settings:
            values = [r['metrics'][metric] for r in records if r['setting'] == setting]
            if values:
                per_setting.append(float(np.mean(values)))
                result[f"{metric}@{setting}"] = per_setting[-1]
        result[metric] = float(np.mean(per_setting)) if per_setting else float('nan')
    return result


def sweep(taus: Sequence[float], betas: Sequence[float], base: BenchGrid,
          aligner: str = 'labeled_eot', workers: Optional[int] = None) -> List[Dict[str, float]]:
    """
    Args:
        taus, betas: 스윕 격자
        base: settings/seeds/split/학습 설정을 가져올 그리드 (learner/aligner는 덮어씀)
        aligner: 매칭 평가에 쓸 aligner
        workers: 칸 내부 worker 수

    Returns:
        [{'tau', 'beta', 'trace', 'bary_foscttm', 'trace@100', ...}] (tau, beta 순)
    """
    settings = [setting_name(s) for s in base.settings]
    rows = []
    for tau in taus:
        for beta in betas:
            cell_dir = _cell_dir(base.output_dir, tau, beta)
            grid = base.model_copy(update={
                'learners': ['groove_cosine'],
                'aligners': [aligner],
                'imputation': False,
                'output_dir': cell_dir,
                'groove': {**base.groove, 'tau': tau, 'beta': beta},
            })
            logger.info(f"스윕 칸 tau={tau:g}, beta={beta:g} 시작")
            BenchManager(grid, workers).run_all()
            records = list(ResultStore(cell_dir).records())
            rows.append({'tau': float(tau), 'beta': float(beta), **_average(records, settings)})

    write_sweep(rows, os.path.join(base.output_dir, SWEEP_CSV))
    return rows


def write_sweep(rows: List[Dict[str, float]], path: str) -> None:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    columns = sorted({key for row in rows for key in row}, key=lambda k: (k not in ('tau', 'beta'), k))
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(row[c]) if c in row else '' for c in columns])
    logger.info(f"스윕 결과 저장: {path} ({len(rows)}칸)")
