"""실행 설정"""
import os
import logging
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()

logger = logging.getLogger(__name__)

# GitHub Actions 환경 감지
IS_GITHUB_ACTIONS = os.getenv('GITHUB_ACTIONS') == 'true'

# 시뮬레이션 기본값 (100% shared 설정)
SIM_CONFIG = {
    'd_s': 10,
    'd_u': 0,
    'n_perturbations': 9,
    'cells_per_condition': 100,
    'p_x': 1000,
    'p_y': 500,
    'scale': 0.1,
    'snr': 0.2,
    'shuffle': True,
}

# shared proportion → (공유 차원, 모달리티별 고유 차원)
SHARED_SETTINGS = {
    100: (10, 0),
    80: (8, 2),
    50: (5, 5),
}

# GROOVE 하이퍼파라미터
GROOVE_CONFIG = {
    'alpha': 1.0,
    'beta': 0.1,
    'tau': 0.2,
    'eta': 1.0,
    'kernel': 'cosine',
    'latent_dim': 128,
    'encoder_hidden': (512, 256),
    'decoder_hidden': (256, 512),
    'var_floor': 1e-4,
}

# 환경별 설정
if IS_GITHUB_ACTIONS:
    # GitHub Actions: 빠른 실행 우선
    TRAIN_CONFIG = {'batch_size': 256, 'iterations': 300, 'learning_rate': 1e-3, 'ablation': 'full'}
    IMPUTER_CONFIG = {'hidden': (256, 256), 'learning_rate': 1e-3, 'iterations': 300, 'batch_size': 128}
    PS_CONFIG = {'hidden': (512, 256), 'learning_rate': 1e-3, 'iterations': 300, 'batch_size': 256}
else:
    # 로컬: 기본 반복 수
    TRAIN_CONFIG = {'batch_size': 256, 'iterations': 2000, 'learning_rate': 1e-3, 'ablation': 'full'}
    IMPUTER_CONFIG = {'hidden': (256, 256), 'learning_rate': 1e-3, 'iterations': 1000, 'batch_size': 128}
    PS_CONFIG = {'hidden': (512, 256), 'learning_rate': 1e-3, 'iterations': 1000, 'batch_size': 256}

# Adam 기본값
ADAM_CONFIG = {
    'learning_rate': 1e-3,
    'beta1': 0.9,
    'beta2': 0.999,
    'eps': 1e-8,
}

# 정렬(OT) 설정 - epsilon은 평균 비용으로 나눈 비용 행렬 기준
ALIGN_CONFIG = {
    'epsilon': 0.05,
    'max_iter': 5000,
    'tol': 1e-9,
    'outer_max_iter': 50,
    'outer_tol': 1e-7,
    'inner_tol': 1e-7,
}

# 벤치마크 설정
BENCH_CONFIG = {
    'learners': ['groove_cosine', 'groove_tdist', 'groove_no_groupclip', 'groove_autoencoder_only', 'ps'],
    'aligners': ['eot', 'egwot', 'labeled_eot', 'labeled_egwot', 'labeled_coot'],
    'settings': [100, 80, 50],
    'seeds': [0, 1, 2],
    'split': 'holdout_80_20',
    'folds': 5,
    'impute_direction': '2to1',
    'knn_k': 10,
    'output_dir': 'results',
}

# 워커 수 (.env 또는 환경변수)
WORKERS = int(os.getenv('GROOVE_WORKERS', '1' if IS_GITHUB_ACTIONS else '4'))

# 로깅 설정
LOGGING_CONFIG = {
    'level': 'INFO' if IS_GITHUB_ACTIONS else 'DEBUG',
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'dir': os.getenv('GROOVE_LOG_DIR', 'logs'),
    'file': 'groovebench.log',
}

if IS_GITHUB_ACTIONS:
    logger.info("🔧 GitHub Actions 환경 설정 적용")
