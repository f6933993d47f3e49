"""벤치마크 매니저 - learner × aligner 조합을 모든 setting/fold/seed에 대해 실행"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator

from groovebench.config import BENCH_CONFIG, SHARED_SETTINGS, WORKERS
from groovebench.evaluate.imputer import ImputerConfig, impute, train_imputer
from groovebench.evaluate.metrics import bary_foscttm, imputation_metrics, trace_metric
from groovebench.exceptions import UnsupportedSettingError
from groovebench.ot_align import align
from groovebench.ot_align.plan import ALIGNER_KINDS, AlignSpec
from groovebench.simulator import make_setting, simulate_dataset
from groovebench.utils.dataset_io import Dataset, load_dataset
from groovebench.utils.result_store import ResultStore
from groovebench.utils.splits import SplitFold, make_splits

logger = logging.getLogger(__name__)

LEARNER_NAMES = ('groove_cosine', 'groove_tdist', 'groove_no_groupclip', 'groove_autoencoder_only', 'ps')


class BenchGrid(BaseModel):
    """
    벤치마크 그리드

    settings 항목은 shared proportion(100/80/50, 시뮬레이션) 또는 데이터셋 디렉토리 경로.
    groove/train/ps/imputer/align/sim 은 각 설정 모델에 그대로 넘기는 덮어쓰기 값.
    """
    learners: List[str] = Field(default_factory=lambda: list(BENCH_CONFIG['learners']))
    aligners: List[str] = Field(default_factory=lambda: list(BENCH_CONFIG['aligners']))
    settings: List[Union[int, str]] = Field(default_factory=lambda: list(BENCH_CONFIG['settings']))
    seeds: List[int] = Field(default_factory=lambda: list(BENCH_CONFIG['seeds']))
    split: Literal['holdout_80_20', 'kfold', 'lopo'] = BENCH_CONFIG['split']
    folds: int = Field(BENCH_CONFIG['folds'], ge=2)
    impute_direction: Literal['1to2', '2to1'] = BENCH_CONFIG['impute_direction']
    knn_k: int = Field(BENCH_CONFIG['knn_k'], ge=1)
    imputation: bool = True
    output_dir: str = BENCH_CONFIG['output_dir']
    groove: Dict[str, Any] = Field(default_factory=dict)
    train: Dict[str, Any] = Field(default_factory=dict)
    ps: Dict[str, Any] = Field(default_factory=dict)
    imputer: Dict[str, Any] = Field(default_factory=dict)
    align: Dict[str, Any] = Field(default_factory=dict)
    sim: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('learners')
    @classmethod
    def _known_learners(cls, value):
        unknown = [name for name in value if name not in LEARNER_NAMES]
        if unknown:
            raise ValueError(f"알 수 없는 learner: {unknown}")
        return value

    @field_validator('aligners')
    @classmethod
    def _known_aligners(cls, value):
        unknown = [name for name in value if name not in ALIGNER_KINDS]
        if unknown:
            raise ValueError(f"알 수 없는 aligner: {unknown}")
        return value


@dataclass
class BenchJob:
    """learner 학습 1회 단위 - 같은 임베딩을 모든 aligner가 공유"""
    setting: str
    learner: str
    fold: int
    seed: int
    dataset: Dataset
    split: SplitFold

    @property
    def cell_seed(self) -> int:
        return self.seed * 1000 + self.fold


def setting_name(setting: Union[int, str]) -> str:
    setting = str(setting)
    return setting if setting.isdigit() else os.path.basename(os.path.normpath(setting))


class BenchManager:
    """벤치마크 매니저 - 등록된 learner를 그리드 전체에 대해 자동 실행"""

    def __init__(self, grid: BenchGrid, workers: Optional[int] = None):
        self.grid = grid
        self.workers = workers or WORKERS
        self.store = ResultStore(grid.output_dir)
        self.learners = {}
        self.failures: List[Dict[str, Any]] = []
        self._register_learners()

    def _register_learners(self):
        """learner 등록 (config.py의 이름과 매칭)"""
        from groovebench.learners.groove_cosine import GrooveCosineLearner
        from groovebench.learners.groove_tdist import GrooveTdistLearner
        from groovebench.learners.groove_ablation import GrooveNoGroupClipLearner, GrooveAutoencoderOnlyLearner
        from groovebench.learners.ps import PSLearner

        self.learners = {
            'groove_cosine': GrooveCosineLearner,
            'groove_tdist': GrooveTdistLearner,
            'groove_no_groupclip': GrooveNoGroupClipLearner,
            'groove_autoencoder_only': GrooveAutoencoderOnlyLearner,
            'ps': PSLearner,
        }
        logger.debug(f"총 {len(self.learners)}개 learner 등록 완료")

    def load_setting(self, setting: Union[int, str], seed: int) -> Dataset:
        """shared proportion이면 seed별 시뮬레이션, 아니면 디렉토리 로드"""
        if str(setting).isdigit():
            proportion = int(setting)
            if proportion not in SHARED_SETTINGS:
                raise UnsupportedSettingError(f"지원하지 않는 shared proportion: {proportion}")
            return simulate_dataset(make_setting(proportion, seed, **self.grid.sim))
        dataset = load_dataset(str(setting))
        if dataset.pairing is None:
            raise UnsupportedSettingError(f"{setting}: 참 짝 정보가 없어 평가할 수 없습니다")
        return dataset

    def cell_key(self, job: BenchJob, aligner: str) -> str:
        return self.store.cell_key(job.setting, job.learner, aligner, job.fold, job.seed)

    def build_jobs(self) -> List[BenchJob]:
        jobs = []
        for setting in self.grid.settings:
            name = setting_name(setting)
            for seed in self.grid.seeds:
                try:
                    dataset = self.load_setting(setting, seed)
                    plan = make_splits(dataset.labels_x, self.grid.split, seed, k=self.grid.folds,
                                       labels_y=dataset.labels_y, pairing=dataset.pairing)
                except Exception as e:
                    logger.error(f"setting {name} seed {seed} 준비 실패: {str(e)}", exc_info=True)
                    self.failures.append({'setting': name, 'seed': seed, 'error': str(e)})
                    continue
                for fold, split in enumerate(plan):
                    for learner in self.grid.learners:
                        jobs.append(BenchJob(name, learner, fold, seed, dataset, split))
        return jobs

    def _imputation_data(self, job: BenchJob):
        """(소스 train, 타깃 train, 소스 test, 타깃 test)"""
        data, split = job.dataset, job.split
        X_train, X_test = data.X[split.train_x], data.X[split.test_x]
        Y_train, Y_test = data.Y[split.train_y], data.Y[split.test_y]
        if self.grid.impute_direction == '2to1':
            return Y_train, X_train, Y_test, X_test
        return X_train, Y_train, X_test, Y_test

    def run_cell(self, job: BenchJob, embeddings, aligner: str) -> Dict[str, Any]:
        """aligner 하나에 대한 매칭 + imputation 평가"""
        data, split = job.dataset, job.split
        Z1_test, Z2_test = embeddings[2:]
        spec = AlignSpec(**{**self.grid.align, 'kind': aligner})

        # 매칭: test 임베딩 정렬, test 행 i끼리가 참 짝
        plan_test = align(Z1_test, Z2_test, spec, data.labels_x[split.test_x], data.labels_y[split.test_y])
        metrics = {
            'trace': trace_metric(plan_test),
            'bary_foscttm': bary_foscttm(plan_test, data.X[split.test_x], data.Y[split.test_y]),
        }

        plan_train = None
        if self.grid.imputation:
            plan_train = self._impute_cell(job, embeddings, spec, metrics)

        return {
            'setting': job.setting,
            'learner': job.learner,
            'aligner': aligner,
            'fold': job.fold,
            'seed': job.seed,
            'held_out_label': split.held_out_label,
            'metrics': metrics,
            'plan': {
                'test_converged': plan_test.converged,
                'test_iterations': plan_test.iterations,
                'train_converged': plan_train.converged if plan_train else None,
                'train_iterations': plan_train.iterations if plan_train else None,
            },
        }

    def _impute_cell(self, job: BenchJob, embeddings, spec: AlignSpec, metrics: Dict[str, float]):
        """train 임베딩 plan으로 imputer 학습 후 test imputation 지표를 metrics에 추가"""
        data, split = job.dataset, job.split
        Z1_train, Z2_train = embeddings[:2]
        plan_train = align(Z1_train, Z2_train, spec, data.labels_x[split.train_x], data.labels_y[split.train_y])
        coupling = plan_train.coupling if self.grid.impute_direction == '2to1' else plan_train.coupling.T
        src_train, tgt_train, src_test, tgt_test = self._imputation_data(job)
        imputer_config = ImputerConfig(**{**self.grid.imputer, 'seed': job.cell_seed})
        imputer = train_imputer(coupling, src_train, tgt_train, imputer_config)
        metrics.update(imputation_metrics(tgt_test, impute(imputer, src_test), k=self.grid.knn_k))
        return plan_train

    def _train_dataset(self, job: BenchJob) -> Dataset:
        data, split = job.dataset, job.split
        return Dataset(data.X[split.train_x], data.Y[split.train_y],
                       data.labels_x[split.train_x], data.labels_y[split.train_y])

    def run_job(self, job: BenchJob) -> int:
        """
        learner 한 번 학습 후 남은 aligner 셀을 모두 실행

        Returns:
            새로 완료한 셀 수
        """
        pending = [a for a in self.grid.aligners if not self.store.has(self.cell_key(job, a))]
        if not pending:
            logger.debug(f"{job.setting}/{job.learner}/fold {job.fold}/seed {job.seed}: 이미 완료 - 건너뜀")
            return 0

        label = f"{job.setting}/{job.learner}/fold {job.fold}/seed {job.seed}"
        try:
            learner = self.learners[job.learner](self.grid.groove, self.grid.train, self.grid.ps)
            train_data = self._train_dataset(job)
            learner.fit(train_data, seed=job.cell_seed)
            train_groupclip = learner.dataset_groupclip(train_data)
            data, split = job.dataset, job.split
            embeddings = (*learner.embed_pair(data.X[split.train_x], data.Y[split.train_y]),
                          *learner.embed_pair(data.X[split.test_x], data.Y[split.test_y]))
        except Exception as e:
            logger.error(f"{label} learner 학습 실패: {str(e)}", exc_info=True)
            for aligner in pending:
                self.failures.append({'key': self.cell_key(job, aligner), 'error': str(e)})
            return 0

        done = 0
        for aligner in pending:
            key = self.cell_key(job, aligner)
            try:
                record = self.run_cell(job, embeddings, aligner)
                record['key'] = key
                record['train_groupclip'] = train_groupclip
                self.store.save(key, record)
                done += 1
                logger.info(f"{label} + {aligner}: trace={record['metrics']['trace']:.3f} "
                            f"foscttm={record['metrics']['bary_foscttm']:.3f}")
            except Exception as e:
                logger.error(f"셀 {key} ({label} + {aligner}) 실패: {str(e)}", exc_info=True)
                self.failures.append({'key': key, 'error': str(e)})
        return done

    def run_all(self) -> int:
        """
        모든 job 실행 (실패한 셀은 기록만 하고 계속)

        Returns:
            새로 완료한 셀 수
        """
        jobs = self.build_jobs()
        logger.info(f"벤치마크 시작: job {len(jobs)}개 × aligner {len(self.grid.aligners)}개, 워커 {self.workers}개")

        if self.workers <= 1:
            completed = [self.run_job(job) for job in jobs]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                completed = list(pool.map(self.run_job, jobs))

        total = int(np.sum(completed)) if completed else 0
        logger.info(f"벤치마크 완료: 새 셀 {total}개 / 실패 {len(self.failures)}개")
        return total


def run_benchmark(grid: BenchGrid, workers: Optional[int] = None, top_n: Optional[int] = None):
    """
    그리드 실행 후 결과 디렉토리에서 리포트 생성

    Returns:
        BenchmarkReport
    """
    from groovebench.report import build_report, write_report

    manager = BenchManager(grid, workers)
    manager.run_all()
    report = build_report(grid.output_dir)
    report.failures = list(manager.failures)
    write_report(report, grid.output_dir, top_n=top_n)
    return report
