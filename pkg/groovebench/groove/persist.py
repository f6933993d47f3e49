"""GROOVE 모델 저장/불러오기 - 파라미터마다 GRVM 파일 + manifest.yaml"""
import logging
import os

import numpy as np

from groovebench.exceptions import FormatError
from groovebench.groove.model import GrooveHyper, GrooveModel
from groovebench.numerics.layers import RunningStats
from groovebench.numerics.matrix import read_grvm, write_grvm
from groovebench.utils.manifest import read_config, write_manifest

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.yaml'


def save_model(model: GrooveModel, directory: str, extra: dict = None) -> None:
    os.makedirs(directory, exist_ok=True)
    for name, value in model.params.items():
        write_grvm(os.path.join(directory, f"{name}.grvm"), value)
    for key, stats in model.buffers.items():
        write_grvm(os.path.join(directory, f"{key}.running.grvm"), np.vstack([stats.mean, stats.var]))

    manifest = {
        'hyper': model.hyper.model_dump(),
        'widths': list(model.widths),
        'params': sorted(model.params),
        'buffers': sorted(model.buffers),
    }
    if extra:
        manifest.update(extra)
    write_manifest(os.path.join(directory, MANIFEST), manifest)
    logger.info(f"모델 저장 완료: {directory} (파라미터 {len(model.params)}개)")


def load_model(directory: str) -> GrooveModel:
    """
    save_model()로 저장한 디렉토리에서 모델 복원

    GRVM은 float32로 저장되므로 복원 값은 저장 전과 float32 정밀도까지만 같다.
    """
    manifest = read_config(os.path.join(directory, MANIFEST))
    try:
        # 빈 hidden 튜플은 manifest에서 생략된다
        hyper = GrooveHyper(**{'encoder_hidden': (), 'decoder_hidden': (), **manifest['hyper']})
        widths = tuple(int(w) for w in manifest['widths'])
        param_names = manifest.get('params', [])
        buffer_names = manifest.get('buffers', [])
    except (KeyError, TypeError) as e:
        raise FormatError(f"{directory}: 모델 manifest 항목 누락 - {e}")

    model = GrooveModel(hyper, widths)
    for name in param_names:
        model.params[name] = read_grvm(os.path.join(directory, f"{name}.grvm"))
    for key in buffer_names:
        stacked = read_grvm(os.path.join(directory, f"{key}.running.grvm"))
        model.buffers[key] = RunningStats(stacked[0], stacked[1])
    return model
