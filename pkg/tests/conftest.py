import numpy as np
import pytest

from groovebench.groove.model import GrooveHyper
from groovebench.groove.trainer import TrainConfig
from groovebench.numerics.rng import RngStream
from groovebench.simulator import make_setting, simulate_dataset


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def gen():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """조건 4개 × 20셀, 피처 30/20"""
    return make_setting(100, seed=0, cells_per_condition=20, p_x=30, p_y=20, n_perturbations=3)


@pytest.fixture
def small_dataset(small_config):
    return simulate_dataset(small_config)


@pytest.fixture
def small_hyper():
    return GrooveHyper(latent_dim=8, encoder_hidden=(16,), decoder_hidden=(16,))


@pytest.fixture
def small_train():
    return TrainConfig(batch_size=16, iterations=5, learning_rate=1e-3, seed=0)


@pytest.fixture
def tiny_grid_options(tmp_path):
    """learner 1개 × aligner 1개 × fold 1개짜리 벤치마크 그리드"""
    return {
        'learners': ['groove_cosine'],
        'aligners': ['labeled_eot'],
        'settings': [100],
        'seeds': [0],
        'split': 'holdout_80_20',
        'knn_k': 3,
        'output_dir': str(tmp_path / 'results'),
        'groove': {'latent_dim': 4, 'encoder_hidden': (8,), 'decoder_hidden': (8,)},
        'train': {'batch_size': 8, 'iterations': 3},
        'imputer': {'hidden': (8,), 'iterations': 3, 'batch_size': 8},
        'align': {'max_iter': 500, 'outer_max_iter': 5},
        'sim': {'cells_per_condition': 10, 'p_x': 12, 'p_y': 8, 'n_perturbations': 2},
    }
