"""시드 고정 난수 스트림과 분포 샘플링"""
import logging
from typing import Sequence, Tuple, Union

import numpy as np

from groovebench.exceptions import ParameterError, DegenerateWeightsError

logger = logging.getLogger(__name__)

Shape = Union[int, Tuple[int, ...]]


class RngStream:
    """
    시드 기반 난수 스트림

    같은 (seed, 호출 순서)면 비트 단위로 같은 값을 낸다.
    counter는 지금까지 소비한 draw 호출 수.
    """

    def __init__(self, seed: int, key: Sequence[int] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self.counter = 0
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, *key: int) -> 'RngStream':
        """부모 상태와 무관한 독립 하위 스트림"""
        return RngStream(self.seed, self.key + tuple(key))

    @property
    def generator(self) -> np.random.Generator:
        self.counter += 1
        return self._generator

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key}, counter={self.counter})"


def _check_positive(name: str, value: float):
    if not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name}은(는) 양수여야 합니다: {value}")


def sample_normal(rng: RngStream, shape: Shape, mu=0.0, sigma=1.0) -> np.ndarray:
    if np.any(np.asarray(sigma) < 0):
        raise ParameterError(f"sigma는 음수일 수 없습니다: {sigma}")
    return rng.generator.normal(mu, sigma, size=shape)


def sample_gamma(rng: RngStream, shape: Shape, k: float = 1.0, scale: float = 1.0) -> np.ndarray:
    """Gamma(k, scale) - numpy의 Marsaglia–Tsang 샘플러 (k<1은 boost)"""
    _check_positive('shape', k)
    _check_positive('scale', scale)
    return rng.generator.standard_gamma(k, size=shape) * scale


def sample_beta(rng: RngStream, shape: Shape, a: float, b: float) -> np.ndarray:
    """Beta(a, b) = Ga / (Ga + Gb)"""
    _check_positive('a', a)
    _check_positive('b', b)
    ga = sample_gamma(rng, shape, a)
    gb = sample_gamma(rng, shape, b)
    return ga / (ga + gb)


def sample_bernoulli(rng: RngStream, shape: Shape, p: float) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p는 [0, 1] 범위여야 합니다: {p}")
    return (rng.generator.random(size=shape) < p).astype(np.float64)


def sample_multinomial(rng: RngStream, weights) -> int:
    """가중치 비례로 인덱스 하나를 뽑는다"""
    w = np.asarray(weights, dtype=np.float64).ravel()
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ParameterError("multinomial 가중치는 음수가 아닌 유한값이어야 합니다")
    total = w.sum()
    if total <= 0:
        raise DegenerateWeightsError("multinomial 가중치 합이 0입니다")
    return int(rng.generator.choice(w.size, p=w / total))


def sample_distribution(kind: str, shape: Shape, rng: RngStream, /, **params):
    """
    분포 이름으로 샘플링

    Args:
        kind: 'normal' | 'gamma' | 'beta' | 'bernoulli' | 'multinomial'
        shape: 출력 shape (multinomial은 무시, 인덱스 1개 반환)
        rng: 난수 스트림
        **params: 분포 파라미터 (mu/sigma, shape/scale, a/b, p, weights)
    """
    if kind == 'normal':
        return sample_normal(rng, shape, params.get('mu', 0.0), params.get('sigma', 1.0))
    if kind == 'gamma':
        return sample_gamma(rng, shape, params.get('shape', 1.0), params.get('scale', 1.0))
    if kind == 'beta':
        return sample_beta(rng, shape, params['a'], params['b'])
    if kind == 'bernoulli':
        return sample_bernoulli(rng, shape, params['p'])
    if kind == 'multinomial':
        return sample_multinomial(rng, params['weights'])
    raise ParameterError(f"알 수 없는 분포: {kind}")
