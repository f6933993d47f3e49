"""
GROOVE 모델 - 모달리티별 encoder/decoder + 공유 coupling layer

encoder g^(m): k^(m) → hidden → 2d (앞 d개는 mean, 뒤 d개는 log-variance)
coupling f:   d → d 선형 사상, 모든 모달리티가 공유
decoder d^(m): d → hidden → k^(m)
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from groovebench.config import GROOVE_CONFIG
from groovebench.exceptions import ParameterError
from groovebench.groove.network import ForwardPass, init_mlp
from groovebench.numerics.layers import RunningStats, dense_forward
from groovebench.numerics.matrix import as_matrix, check_width
from groovebench.numerics.rng import RngStream
from groovebench.numerics.tape import Node, add, mul, exp, sqrt, add_const, slice_cols

logger = logging.getLogger(__name__)

MODALITIES = (1, 2)


class GrooveHyper(BaseModel):
    """GROOVE 하이퍼파라미터"""
    alpha: float = Field(GROOVE_CONFIG['alpha'], ge=0)
    beta: float = Field(GROOVE_CONFIG['beta'], ge=0)
    tau: float = Field(GROOVE_CONFIG['tau'], gt=0)
    eta: float = Field(GROOVE_CONFIG['eta'], gt=0)
    kernel: Literal['cosine', 'tdist'] = GROOVE_CONFIG['kernel']
    latent_dim: int = Field(GROOVE_CONFIG['latent_dim'], ge=1)
    encoder_hidden: Tuple[int, ...] = GROOVE_CONFIG['encoder_hidden']
    decoder_hidden: Tuple[int, ...] = GROOVE_CONFIG['decoder_hidden']
    var_floor: float = Field(GROOVE_CONFIG['var_floor'], ge=0)


@dataclass
class GrooveModel:
    hyper: GrooveHyper
    widths: Tuple[int, int]
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    buffers: Dict[str, RunningStats] = field(default_factory=dict)

    def width(self, modality: int) -> int:
        if modality not in MODALITIES:
            raise ParameterError(f"모달리티는 1 또는 2여야 합니다: {modality}")
        return self.widths[modality - 1]

    def with_params(self, params: Dict[str, np.ndarray]) -> 'GrooveModel':
        return replace(self, params=params, buffers=dict(self.buffers))


def init_model(k1: int, k2: int, hyper: Optional[GrooveHyper] = None, seed: int = 0) -> GrooveModel:
    hyper = hyper or GrooveHyper()
    d = hyper.latent_dim
    rng = RngStream(seed, key=(7,))
    model = GrooveModel(hyper, (k1, k2))
    for m, k in zip(MODALITIES, (k1, k2)):
        init_mlp(model.params, model.buffers, f"enc{m}", [k, *hyper.encoder_hidden, 2 * d], rng.child(m))
        init_mlp(model.params, model.buffers, f"dec{m}", [d, *hyper.decoder_hidden, k], rng.child(10 + m))
    init_mlp(model.params, model.buffers, "coupling", [d, d], rng.child(20))
    return model


def encode_node(fp: ForwardPass, model: GrooveModel, x: Node, modality: int, mode: str,
                rng: Optional[RngStream] = None) -> Node:
    """f(g^(m)(x)) - train 모드는 reparameterization 샘플, eval 모드는 mean만"""
    check_width(x.value, model.width(modality), f"modality {modality} 입력")
    d = model.hyper.latent_dim
    tape = fp.tape
    h = fp.mlp(f"enc{modality}", x, mode)
    mu = slice_cols(tape, h, 0, d)
    if mode == 'train':
        if rng is None:
            raise ParameterError("train 모드 encode에는 rng가 필요합니다")
        logvar = slice_cols(tape, h, d, 2 * d)
        std = sqrt(tape, add_const(tape, exp(tape, logvar), model.hyper.var_floor))
        noise = fp.const(rng.generator.standard_normal(mu.value.shape))
        z = add(tape, mu, mul(tape, noise, std))
    else:
        z = mu
    return dense_forward(tape, z, fp.p("coupling.0.W"), fp.p("coupling.0.b"))


def decode_node(fp: ForwardPass, model: GrooveModel, z: Node, modality: int, mode: str) -> Node:
    check_width(z.value, model.hyper.latent_dim, "잠재 z")
    return fp.mlp(f"dec{modality}", z, mode)


def encode(model: GrooveModel, x, modality: int, mode: str = 'eval',
           rng: Optional[RngStream] = None) -> np.ndarray:
    """
    모달리티 m 샘플을 공유 잠재공간으로

    모델 상태(running stats)는 바꾸지 않는다.
    """
    x = as_matrix(x)
    fp = ForwardPass(model.params, model.buffers)
    return encode_node(fp, model, fp.const(x), modality, mode, rng).value


def decode(model: GrooveModel, z, modality: int, mode: str = 'eval') -> np.ndarray:
    z = as_matrix(z)
    fp = ForwardPass(model.params, model.buffers)
    return decode_node(fp, model, fp.const(z), modality, mode).value
