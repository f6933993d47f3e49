"""
약하게 짝지어진(weakly paired) 두 모달리티 데이터 시뮬레이터

공유 잠재변수 Z와 모달리티 고유 잠재변수 U_X, U_Y를 만들고,
조건별 perturbation을 잠재공간에 더한 뒤 무작위 선형 사상으로 관측값을 만든다.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from groovebench.config import SIM_CONFIG, SHARED_SETTINGS
from groovebench.exceptions import UnsupportedSettingError
from groovebench.numerics.matrix import Matrix
from groovebench.numerics.rng import (
    RngStream, sample_normal, sample_gamma, sample_beta, sample_bernoulli,
)
from groovebench.utils.dataset_io import Dataset

logger = logging.getLogger(__name__)

EFFECT_FLOOR = 3.0
PENETRANCE_BETA = (1.0, 10.0)
NOISE_LOG_SD = -3.0


class SimConfig(BaseModel):
    """생성 모델 설정"""
    d_s: int = Field(SIM_CONFIG['d_s'], ge=1)
    d_u: int = Field(SIM_CONFIG['d_u'], ge=0)
    n_perturbations: int = Field(SIM_CONFIG['n_perturbations'], ge=0)
    cells_per_condition: int = Field(SIM_CONFIG['cells_per_condition'], ge=1)
    p_x: int = Field(SIM_CONFIG['p_x'], ge=1)
    p_y: int = Field(SIM_CONFIG['p_y'], ge=1)
    scale: float = Field(SIM_CONFIG['scale'], gt=0)
    snr: float = Field(SIM_CONFIG['snr'], gt=0)
    shuffle: bool = SIM_CONFIG['shuffle']
    seed: int = 0

    @property
    def latent_dim(self) -> int:
        return self.d_s + self.d_u

    @property
    def n_conditions(self) -> int:
        return self.n_perturbations + 1

    @property
    def n_cells(self) -> int:
        return self.n_conditions * self.cells_per_condition


@dataclass(frozen=True)
class PerturbationEffect:
    condition: int
    kind: str  # 'shared' | 'x' | 'y'
    target: int
    effect: float


@dataclass
class EffectRegistry:
    """조건별 효과 크기와 셀별 penetrance"""
    effects: List[PerturbationEffect]
    q_shared: np.ndarray
    q_x: np.ndarray
    q_y: np.ndarray

    def for_condition(self, condition: int) -> List[PerturbationEffect]:
        return [e for e in self.effects if e.condition == condition]


@dataclass
class Latents:
    Z: Matrix
    U_x: Matrix
    U_y: Matrix
    V_x: Matrix
    V_y: Matrix


@dataclass
class ProjectionRegistry:
    """관측 사상 파라미터 (A, b, s)와 노이즈 파라미터 (mu, offsetsd, sigma)"""
    A_x: Matrix
    A_y: Matrix
    b_x: np.ndarray
    b_y: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray
    mu_x: np.ndarray
    mu_y: np.ndarray
    offsetsd_x: np.ndarray
    offsetsd_y: np.ndarray
    xi_x: Matrix
    xi_y: Matrix

    @property
    def sigma_x(self) -> np.ndarray:
        return np.exp(NOISE_LOG_SD + self.offsetsd_x)

    @property
    def sigma_y(self) -> np.ndarray:
        return np.exp(NOISE_LOG_SD + self.offsetsd_y)


@dataclass
class SimTruth:
    """
    정답 정보

    perm_x / perm_y는 조건 블록 순서의 셀을 어떤 순서로 섞었는지,
    pairing[i]는 X의 i번째 행과 짝인 Y 행 인덱스.
    labels는 V_x(= X) 행 순서를 따른다. effects의 셀별 penetrance만 셔플 전 블록 순서.
    """
    V_x: Matrix
    V_y: Matrix
    labels: np.ndarray
    pairing: np.ndarray
    perm_x: np.ndarray
    perm_y: np.ndarray
    effects: Optional[EffectRegistry] = None


@dataclass
class SimulatedDataset(Dataset):
    truth: Optional[SimTruth] = None
    projection: Optional[ProjectionRegistry] = None
    config: Optional[SimConfig] = None


def condition_labels(config: SimConfig) -> np.ndarray:
    """조건 블록 순서 라벨 (0 = control)"""
    return np.repeat(np.arange(config.n_conditions), config.cells_per_condition)


def generate_latents(config: SimConfig, rng: RngStream) -> Latents:
    n = config.n_cells
    Z = sample_normal(rng, (n, config.d_s), 0.0, config.scale)
    U_x = sample_normal(rng, (n, config.d_u), 0.0, config.scale)
    U_y = sample_normal(rng, (n, config.d_u), 0.0, config.scale)
    V_x = np.concatenate([Z, U_x], axis=1)
    V_y = np.concatenate([Z, U_y], axis=1)
    return Latents(Z, U_x, U_y, V_x, V_y)


def _draw_effect(rng: RngStream) -> float:
    magnitude = max(EFFECT_FLOOR, float(sample_gamma(rng, 1)[0]))
    sign = 2.0 * sample_bernoulli(rng, 1, 0.5)[0] - 1.0
    return sign * magnitude


def apply_perturbations(V_x: Matrix, V_y: Matrix, config: SimConfig,
                        rng: RngStream) -> Tuple[Matrix, Matrix, EffectRegistry]:
    """
    조건 I(1..L)의 셀에 shared / modality-specific 효과를 더한다

    shared: 타깃 t_s(I) = (I-1) mod d_s, 두 모달리티에 같은 e_s(I) * q_s,i
    specific: 타깃 t_u(I) = ((I-1) mod d_u) + d_s, 모달리티별 독립 효과와 penetrance
    """
    V_x = V_x.copy()
    V_y = V_y.copy()
    labels = condition_labels(config)
    n = labels.size
    a, b = PENETRANCE_BETA

    # penetrance는 셀당 한 번 뽑아 shared 효과에서 두 모달리티가 공유
    q_shared = sample_beta(rng, n, a, b)
    q_x = sample_beta(rng, n, a, b)
    q_y = sample_beta(rng, n, a, b)

    if config.d_u == 0 and config.n_perturbations > 0:
        logger.info("고유 차원이 없어 modality-specific perturbation 생략 (100% shared)")

    effects = []
    for condition in range(1, config.n_conditions):
        cells = labels == condition

        t_s = (condition - 1) % config.d_s
        e_s = _draw_effect(rng)
        V_x[cells, t_s] += e_s * q_shared[cells]
        V_y[cells, t_s] += e_s * q_shared[cells]
        effects.append(PerturbationEffect(condition, 'shared', t_s, e_s))

        if config.d_u == 0:
            continue
        t_u = ((condition - 1) % config.d_u) + config.d_s
        e_x = _draw_effect(rng)
        e_y = _draw_effect(rng)
        V_x[cells, t_u] += e_x * q_x[cells]
        V_y[cells, t_u] += e_y * q_y[cells]
        effects.append(PerturbationEffect(condition, 'x', t_u, e_x))
        effects.append(PerturbationEffect(condition, 'y', t_u, e_y))

    return V_x, V_y, EffectRegistry(effects, q_shared, q_x, q_y)


def _project(V: Matrix, p: int, config: SimConfig, rng: RngStream):
    d = V.shape[1]
    A = sample_normal(rng, (d, p))
    bias = sample_normal(rng, p)
    s = sample_gamma(rng, p, 1.0, 1.0)
    mu = sample_normal(rng, d)
    offsetsd = sample_normal(rng, d)
    sigma = np.exp(NOISE_LOG_SD + offsetsd)
    xi = sample_normal(rng, (V.shape[0], d), mu, sigma) * (config.scale / config.snr)
    observed = ((V + xi) @ A + bias) * s
    return observed, A, bias, s, mu, offsetsd, xi


def observe(V_x: Matrix, V_y: Matrix, config: SimConfig, rng: RngStream,
            effects: Optional[EffectRegistry] = None) -> SimulatedDataset:
    """X = ((V + xi) A + b) * s, 짝은 항등 (행 i끼리)"""
    X, A_x, b_x, s_x, mu_x, off_x, xi_x = _project(V_x, config.p_x, config, rng.child(0))
    Y, A_y, b_y, s_y, mu_y, off_y, xi_y = _project(V_y, config.p_y, config, rng.child(1))

    labels = condition_labels(config)
    identity = np.arange(labels.size)
    truth = SimTruth(V_x, V_y, labels, identity, identity.copy(), identity.copy(), effects)
    projection = ProjectionRegistry(A_x, A_y, b_x, b_y, s_x, s_y, mu_x, mu_y, off_x, off_y, xi_x, xi_y)
    return SimulatedDataset(X, Y, labels, labels.copy(), identity.copy(),
                            truth=truth, projection=projection, config=config)


def shuffle_modalities(dataset: SimulatedDataset, rng: RngStream) -> SimulatedDataset:
    """
    모달리티별 독립 셔플 (행 순서로 짝을 추측할 수 없게)

    셔플 후 pairing[i] = X의 i행과 짝인 Y 행.
    """
    n = dataset.X.shape[0]
    perm_x = rng.child(0).generator.permutation(n)
    perm_y = rng.child(1).generator.permutation(n)
    inverse_y = np.empty(n, dtype=np.int64)
    inverse_y[perm_y] = np.arange(n)
    pairing = inverse_y[perm_x]

    truth = dataset.truth
    new_truth = SimTruth(truth.V_x[perm_x], truth.V_y[perm_y], truth.labels[perm_x], pairing,
                         perm_x, perm_y, truth.effects)
    return SimulatedDataset(dataset.X[perm_x], dataset.Y[perm_y],
                            dataset.labels_x[perm_x], dataset.labels_y[perm_y], pairing,
                            truth=new_truth, projection=dataset.projection, config=dataset.config)


def simulate_dataset(config: SimConfig) -> SimulatedDataset:
    """잠재변수 → perturbation → 관측 → (선택) 셔플"""
    rng = RngStream(config.seed)
    latents = generate_latents(config, rng.child(0))
    V_x, V_y, effects = apply_perturbations(latents.V_x, latents.V_y, config, rng.child(1))
    dataset = observe(V_x, V_y, config, rng.child(2), effects=effects)
    if config.shuffle:
        dataset = shuffle_modalities(dataset, rng.child(3))
    logger.info(f"시뮬레이션 완료: n={config.n_cells}, d_s={config.d_s}, d_u={config.d_u}, seed={config.seed}")
    return dataset


def make_setting(proportion: int, seed: int = 0, **overrides) -> SimConfig:
    """shared proportion(100/80/50)을 SimConfig로"""
    if proportion not in SHARED_SETTINGS:
        raise UnsupportedSettingError(
            f"지원하지 않는 shared proportion: {proportion} (가능: {sorted(SHARED_SETTINGS)})")
    d_s, d_u = SHARED_SETTINGS[proportion]
    return SimConfig(**{**overrides, 'd_s': d_s, 'd_u': d_u, 'seed': seed})


def simulate_replicates(proportion: int, seeds: List[int], **overrides) -> List[SimulatedDataset]:
    """seed마다 독립 데이터셋 하나"""
    return [simulate_dataset(make_setting(proportion, seed, **overrides)) for seed in seeds]
